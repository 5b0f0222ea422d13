"""Atoms, the growth class, the scaling flow and the Frechet metric"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scaleflow.errors import InvalidInputError
from scaleflow.measure_model import (
    AtomicMeasure,
    FrechetFamily,
    GrowthClass,
    LogPolarAtom,
    TestFunction,
    apply_flow,
    bump,
    counting_function,
    enumerate_test_functions,
    frechet_distance,
    in_growth_class,
    pair,
    random_class_measure,
)

UNIT = GrowthClass(1.0, 1.0)
seeds = st.integers(min_value=0, max_value=2**32 - 1)
integer_times = st.integers(min_value=-5, max_value=5).map(float)


def golden_pair() -> AtomicMeasure:
    return AtomicMeasure.from_triples([(0.0, 0.0, 0.5), (math.log(0.618), 0.0, 0.4)])


class TestAtoms:
    def test_angle_is_reduced(self):
        atom = LogPolarAtom(0.0, -math.pi / 2, 1.0)
        assert atom.phi == pytest.approx(3 * math.pi / 2)

    @pytest.mark.parametrize("mass", [0.0, -1.0, math.nan, math.inf])
    def test_bad_mass_is_rejected(self, mass):
        with pytest.raises(InvalidInputError):
            LogPolarAtom(0.0, 0.0, mass)

    def test_canonical_order_and_merge(self):
        mu = AtomicMeasure.from_triples([(1.0, 0.0, 0.25), (0.0, 0.0, 0.5), (1.0, 0.0, 0.25)])
        assert mu.triples() == [(0.0, 0.0, 0.5), (1.0, 0.0, 0.5)]
        assert mu.total_mass == 1.0

    @pytest.mark.parametrize("rho, sigma", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, math.inf)])
    def test_growth_class_parameters(self, rho, sigma):
        with pytest.raises(InvalidInputError):
            GrowthClass(rho, sigma)


class TestCountingFunction:
    @pytest.mark.parametrize("r, expected", [(0.5, 0.0), (1.0, 0.4), (2.0, 0.9)])
    def test_strict_disc_mass(self, r, expected):
        assert counting_function(golden_pair(), r) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("r", [0.0, -1.0])
    def test_nonpositive_radius_is_rejected(self, r):
        with pytest.raises(InvalidInputError):
            counting_function(golden_pair(), r)


class TestGrowthClass:
    def test_single_atom_on_the_boundary(self):
        ok, worst = in_growth_class(AtomicMeasure.from_triples([(0.0, 0.0, 1.0)]), UNIT)
        assert ok and worst == 1.0

    def test_single_atom_above_the_boundary(self):
        ok, worst = in_growth_class(AtomicMeasure.from_triples([(0.0, 0.0, 1.1)]), UNIT)
        assert not ok and worst == pytest.approx(1.1)

    def test_empty_measure(self):
        assert in_growth_class(AtomicMeasure.empty(), UNIT) == (True, 0.0)

    def test_golden_pair_is_in_class(self):
        ok, worst = in_growth_class(golden_pair(), UNIT)
        assert ok
        assert worst == pytest.approx(0.9)

    def test_finite_check_matches_dense_radius_scan(self, rng):
        for _ in range(20):
            mu = random_class_measure(rng, UNIT, atoms=5, fill=1.0)
            _, worst = in_growth_class(mu, UNIT)
            radii = np.exp(np.linspace(-4.0, 4.0, 4001))
            scan = max(counting_function(mu, r) / r for r in radii)
            assert scan <= worst * (1 + 1e-12)

    @given(seed=seeds, t=integer_times)
    def test_class_is_invariant_under_the_flow(self, seed, t):
        mu = random_class_measure(np.random.default_rng(seed), UNIT, atoms=4, fill=0.95)
        ok, _ = in_growth_class(apply_flow(mu, t, UNIT), UNIT)
        assert ok


class TestApplyFlow:
    def test_zero_time_returns_the_same_measure(self):
        mu = golden_pair()
        assert apply_flow(mu, 0.0, UNIT) is mu

    def test_log_two_halves_the_mass(self):
        moved = apply_flow(AtomicMeasure.from_triples([(0.0, 0.0, 1.0)]), math.log(2.0), UNIT)
        (y, phi, mass), = moved.triples()
        assert y == pytest.approx(-math.log(2.0), abs=1e-15)
        assert phi == 0.0
        assert mass == pytest.approx(0.5, abs=1e-15)

    def test_group_law(self):
        mu = golden_pair()
        twice = apply_flow(apply_flow(mu, 1.0, UNIT), 2.0, UNIT)
        once = apply_flow(mu, 3.0, UNIT)
        for a, b in zip(twice.atoms, once.atoms):
            assert a.y == pytest.approx(b.y, abs=1e-12)
            assert a.mass == pytest.approx(b.mass, abs=1e-12)

    def test_pairing_follows_the_change_of_variables(self, family):
        mu = golden_pair()
        t = 0.7
        moved = apply_flow(mu, t, UNIT)
        for g in family.members[:20]:
            direct = sum(
                a.mass * math.exp(-t) * g.angular(a.phi) * g.radial(a.y - t) for a in mu.atoms
            )
            assert pair(moved, g) == pytest.approx(direct, abs=1e-12)

    def test_pairing_is_continuous_in_time(self):
        mu = golden_pair()
        g = TestFunction("one", 0, 0.0)
        defects = [abs(pair(apply_flow(mu, 10.0**-k, UNIT), g) - pair(mu, g)) for k in range(1, 7)]
        assert all(later < earlier for earlier, later in zip(defects, defects[1:]))


class TestFarAtoms:
    """Atoms whose radius r = e^y is outside the float range"""

    def test_counting_function(self):
        far = AtomicMeasure.from_triples([(720.0, 0.0, 1.0)])
        near = AtomicMeasure.from_triples([(-720.0, 0.0, 1.0)])
        assert counting_function(far, 1.0) == 0.0
        assert counting_function(far, 1e300) == 0.0
        assert counting_function(near, 1.0) == 1.0

    def test_growth_ratio_far_out(self):
        ok, worst = in_growth_class(AtomicMeasure.from_triples([(720.0, 0.0, 1.0)]), UNIT)
        assert ok
        assert 0.0 <= worst < 1e-300

    def test_growth_ratio_near_the_origin(self):
        ok, worst = in_growth_class(AtomicMeasure.from_triples([(-720.0, 0.0, 1.0)]), UNIT)
        assert not ok
        assert worst == math.inf

    def test_flow_mass_overflow_is_invalid_input(self):
        mu = AtomicMeasure.from_triples([(0.0, 0.0, 1.0)])
        with pytest.raises(InvalidInputError, match="overflows"):
            apply_flow(mu, -720.0, UNIT)
        with pytest.raises(InvalidInputError):
            apply_flow(mu, -8.0, GrowthClass(90.0, 1.0))

    def test_flow_mass_underflow_drops_the_atom(self):
        mu = AtomicMeasure.from_triples([(720.0, 0.0, 1.0)])
        (y, _, mass), = apply_flow(mu, 720.0, UNIT).triples()
        assert y == 0.0 and mass > 0.0
        assert len(apply_flow(mu, 800.0, UNIT)) == 0


class TestTestFunctions:
    def test_bump_values(self):
        assert bump(0.0) == 1.0
        assert bump(1.0) == 0.0 and bump(-1.0) == 0.0 and bump(3.0) == 0.0
        assert 0.0 < bump(0.5) < 1.0

    def test_pairing_at_the_bump_center(self):
        mu = AtomicMeasure.from_triples([(0.0, 0.0, 0.5)])
        assert pair(mu, TestFunction("one", 0, 0.0)) == 0.5
        assert pair(mu, TestFunction("one", 0, 5.0)) == 0.0

    def test_odd_angular_factor_cancels(self):
        mu = AtomicMeasure.from_triples([(0.0, 0.5, 1.0), (0.0, -0.5, 1.0)])
        assert pair(mu, TestFunction("sin", 1, 0.0)) == pytest.approx(0.0, abs=1e-15)

    def test_enumeration_starts_along_the_diagonals(self):
        members = enumerate_test_functions(6)
        assert [(g.kind, g.n, g.center) for g in members] == [
            ("one", 0, 0.0),
            ("one", 0, 1.0),
            ("cos", 1, 0.0),
            ("sin", 1, 0.0),
            ("one", 0, -1.0),
            ("cos", 1, 1.0),
        ]

    def test_default_family_supports(self, family):
        assert family.size == 64
        centers = [g.center for g in family.members]
        assert min(centers) >= -3.0 and max(centers) <= 4.0

    @pytest.mark.parametrize(
        "kind, n", [("one", 1), ("cos", 0), ("tan", 1)]
    )
    def test_bad_members_are_rejected(self, kind, n):
        with pytest.raises(InvalidInputError):
            TestFunction(kind, n, 0.0)

    def test_supported_prefix_and_tail_bound(self, family):
        assert family.supported_prefix(1.0) == 0
        assert family.supported_prefix(1.5) == 1
        assert family.tail_bound(1.5) == 0.5
        assert family.supported_prefix(100.0) == 64


class TestFrechetDistance:
    def test_zero_on_equal_measures(self, family):
        assert frechet_distance(golden_pair(), golden_pair(), family) == 0.0

    def test_weights_sum_below_one(self, family):
        assert family.weights[0] == 0.5 and family.weights[-1] == 2.0**-64
        assert math.fsum(FrechetFamily.default(52).weights) == 1.0 - 2.0**-52

    def test_first_member_term(self):
        fam = FrechetFamily.default(1)
        mu = AtomicMeasure.from_triples([(0.0, 0.0, 1.0)])
        assert frechet_distance(mu, AtomicMeasure.empty(), fam) == 0.5

    def test_pairwise_block_matches_scalar_distance(self, family, rng):
        rows_a = rng.normal(size=(3, 64))
        rows_b = rng.normal(size=(4, 64))
        block = family.pairwise(rows_a, rows_b)
        for i in range(3):
            for j in range(4):
                scalar = family.distance_from_features(rows_a[i], rows_b[j])
                assert block[i, j] == pytest.approx(scalar, abs=1e-15)

    @given(a=seeds, b=seeds, c=seeds)
    def test_metric_properties(self, a, b, c):
        fam = FrechetFamily.default()
        mu1, mu2, mu3 = (
            random_class_measure(np.random.default_rng(seed), UNIT) for seed in (a, b, c)
        )
        d12 = frechet_distance(mu1, mu2, fam)
        assert d12 == frechet_distance(mu2, mu1, fam)
        assert 0.0 <= d12 <= 1.0
        d13 = frechet_distance(mu1, mu3, fam)
        d23 = frechet_distance(mu2, mu3, fam)
        assert d13 <= d12 + d23 + 1e-12
