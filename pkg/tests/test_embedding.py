"""Keller map, Gaussian smoothing and the cylinder measures built from them"""

import math

import numpy as np
import pytest

from scaleflow.dynamics_core import TWO_PI, evaluate_flow
from scaleflow.embedding import (
    CircleMeasure,
    CylinderMeasure,
    GaussianKernel,
    KellerMap,
    YGrid,
    anchor_pairs,
    build_nu,
    distinguishes,
    equivariance_defect,
    growth_integral,
    injectivity_gap,
    keller_embed,
    lipschitz_ratio,
    ray_angles,
    shift_nu,
    to_plane_measure,
)
from scaleflow.errors import InvalidInputError
from scaleflow.example_systems import identity_flow, torus_distance, torus_space
from scaleflow.measure_model import TestFunction

# integral of the unit bump e * exp(-1/(1 - u^2)) over [-1, 1]
BUMP_INTEGRAL = 1.2069003


@pytest.fixture(scope="module")
def kmap() -> KellerMap:
    return KellerMap.for_space(torus_space(), 16)


@pytest.fixture(scope="module")
def kernel() -> GaussianKernel:
    return GaussianKernel(4.0, 0.01)


@pytest.fixture(scope="module")
def grid() -> YGrid:
    return YGrid.from_bounds(-2.0, 2.0, 0.05)


def random_torus_pairs(rng, count, min_distance=0.1):
    pairs = []
    while len(pairs) < count:
        m1 = tuple(rng.uniform(0.0, TWO_PI, size=2))
        m2 = tuple(rng.uniform(0.0, TWO_PI, size=2))
        if torus_distance(m1, m2) >= min_distance:
            pairs.append((m1, m2))
    return pairs


class TestKellerMap:
    def test_torus_anchors(self, kmap):
        assert kmap.size == 16
        assert kmap.normalizer == 0.5
        assert len(anchor_pairs(kmap)) == 120

    def test_angles_are_equispaced(self):
        assert ray_angles(4) == pytest.approx((0.0, math.pi / 2, math.pi, 3 * math.pi / 2))

    def test_weights_lie_in_their_dyadic_band(self, kmap, rng):
        lower = np.ldexp(1.0, -np.arange(2, 18))
        for _ in range(50):
            w = kmap.weights(tuple(rng.uniform(0.0, TWO_PI, size=2)))
            assert np.all(w >= lower) and np.all(w <= 2 * lower)

    def test_total_variation_bound(self, kmap, rng):
        for _ in range(50):
            y = keller_embed(kmap, tuple(rng.uniform(0.0, TWO_PI, size=2)))
            assert y.total_variation <= 1.0 - 2.0**-16

    def test_anchor_gets_the_lower_weight(self, kmap):
        w = kmap.weights(kmap.anchors[0])
        assert w[0] == 0.25

    def test_coincident_anchors_are_rejected(self):
        with pytest.raises(InvalidInputError):
            KellerMap(((0.0, 0.0), (0.0, 0.0)), torus_distance, 0.5)

    def test_single_anchor_is_rejected(self):
        with pytest.raises(InvalidInputError):
            KellerMap(((0.0, 0.0),), torus_distance, 0.5)

    def test_lipschitz_bound(self, kmap, rng):
        for m1, m2 in random_torus_pairs(rng, 20, min_distance=0.0):
            assert lipschitz_ratio(kmap, m1, m2) <= 0.5 + 1e-12
        assert lipschitz_ratio(kmap, (1.0, 2.0), (1.0, 2.0)) == 0.0

    def test_separation_on_a_fine_anchor_mesh(self, rng):
        """Every point is within 0.025 of an anchor, so distance 0.1 moves some ratio by 0.1"""
        fine = KellerMap.for_space(torus_space(), 400)
        bound = 2.0 ** -(fine.size + 1) * (0.05 / fine.normalizer)
        for m1, m2 in random_torus_pairs(rng, 10):
            w1 = keller_embed(fine, m1).weights
            w2 = keller_embed(fine, m2).weights
            assert max(abs(a - b) for a, b in zip(w1, w2)) >= bound * (1 - 1e-9)


class TestCircleMeasure:
    def test_pairing_with_the_constant_probe(self, kmap):
        y = keller_embed(kmap, (0.3, 0.4))
        assert y.pair_angular(TestFunction("one", 0, 0.0)) == y.total_variation

    @pytest.mark.parametrize(
        "angles, weights",
        [
            ((0.0, 1.0), (0.6, 0.6)),
            ((0.0, 0.0), (0.1, 0.1)),
            ((0.0,), (-0.1,)),
            ((7.0,), (0.1,)),
            ((0.0, 1.0), (0.1,)),
        ],
    )
    def test_invalid_measures(self, angles, weights):
        with pytest.raises(InvalidInputError):
            CircleMeasure(angles, weights)


class TestGaussianKernel:
    def test_mass_and_tail(self):
        kernel = GaussianKernel()
        assert kernel.tail < 1e-14
        assert 1.0 - kernel.tail - 1e-9 <= kernel.mass <= 1.0 + 1e-12

    def test_nodes_are_symmetric(self, kernel):
        assert kernel.half_count == 400
        nodes = kernel.nodes
        assert len(nodes) == 801
        assert nodes[0] == -nodes[-1]
        assert kernel.quadrature_weights[0] == 0.005

    @pytest.mark.parametrize("t_cut, dt", [(8.005, 0.01), (0.0, 0.01), (8.0, 0.0)])
    def test_bad_kernels(self, t_cut, dt):
        with pytest.raises(InvalidInputError):
            GaussianKernel(t_cut, dt)


class TestYGrid:
    def test_bounds(self):
        g = YGrid.from_bounds(-6.0, 6.0, 0.05)
        assert g.size == 241
        assert g.y_min == pytest.approx(-6.0) and g.y_max == pytest.approx(6.0)

    @pytest.mark.parametrize("y_min, y_max, dy", [(-6.02, 6.0, 0.05), (1.0, 1.0, 0.05), (0.0, 1.0, 0.0)])
    def test_bad_grids(self, y_min, y_max, dy):
        with pytest.raises(InvalidInputError):
            YGrid.from_bounds(y_min, y_max, dy)

    def test_grid_step_must_follow_the_kernel(self, kmap, golden_torus):
        bad = YGrid.from_bounds(-0.15, 0.15, 0.015)
        with pytest.raises(InvalidInputError):
            build_nu(kmap, golden_torus, GaussianKernel(1.0, 0.01), (0.0, 0.0), bad)


class TestCylinderMeasure:
    def test_shape_is_checked(self, grid):
        with pytest.raises(InvalidInputError):
            CylinderMeasure((0.0,), grid, np.zeros((2, grid.size)), 1.0)

    def test_negative_density_is_rejected(self, grid):
        dens = np.zeros((1, grid.size))
        dens[0, 3] = -1e-3
        with pytest.raises(InvalidInputError):
            CylinderMeasure((0.0,), grid, dens, 1.0)

    def test_densities_are_read_only(self, grid):
        nu = CylinderMeasure((0.0,), grid, np.ones((1, grid.size)), 1.0)
        with pytest.raises(ValueError):
            nu.densities[0, 0] = 2.0

    def test_shift_moves_the_window(self, grid):
        nu = CylinderMeasure((0.0,), grid, np.ones((1, grid.size)), 1.0)
        assert shift_nu(nu, 0.0) is nu
        moved = shift_nu(nu, 0.5)
        assert moved.grid.start == grid.start - 10
        assert np.array_equal(moved.densities, nu.densities)
        with pytest.raises(InvalidInputError):
            shift_nu(nu, 0.01)


class TestBuildNu:
    def test_densities_are_bounded(self, kmap, golden_torus, kernel, grid):
        nu = build_nu(kmap, golden_torus, kernel, (0.0, 0.0), grid)
        assert nu.densities.shape == (16, grid.size)
        assert np.all(nu.densities > 0)
        assert np.all(nu.densities.sum(axis=0) <= 1.0)

    @pytest.mark.parametrize("tau", [0.25, 0.5, 1.0])
    def test_equivariance(self, kmap, golden_torus, kernel, grid, tau):
        assert equivariance_defect(kmap, golden_torus, kernel, (0.0, 0.0), tau, grid) <= 1e-4

    def test_equivariance_does_not_degrade_with_a_finer_kernel(self, kmap, golden_torus, grid):
        """Halving dt shrinks the defect by 1.5x, down to a 1e-12 round-off floor"""
        coarse = equivariance_defect(kmap, golden_torus, GaussianKernel(4.0, 0.01), (0.0, 0.0), 0.5, grid)
        fine = equivariance_defect(kmap, golden_torus, GaussianKernel(4.0, 0.005), (0.0, 0.0), 0.5, grid)
        assert fine <= max(coarse / 1.5, 1e-12)

    @pytest.mark.parametrize("rho", [1.0, 2.5])
    def test_each_ray_stays_in_its_dyadic_band(self, kmap, golden_torus, kernel, grid, rho):
        nu = build_nu(kmap, golden_torus, kernel, (0.3, 1.1), grid, rho)
        bounds = rho * np.ldexp(1.0, -np.arange(1, kmap.size + 1))
        assert np.all(nu.densities.max(axis=1) <= bounds * (1 + 1e-12))

    def test_misaligned_tau(self, kmap, golden_torus, kernel, grid):
        with pytest.raises(InvalidInputError):
            equivariance_defect(kmap, golden_torus, kernel, (0.0, 0.0), 0.03, grid)

    @pytest.mark.parametrize("shift", [-1.0, 0.0, 0.5, 2.0])
    def test_growth_integral(self, kmap, golden_torus, shift):
        grid = YGrid.from_bounds(-6.0, 1.0, 0.05)
        nu = build_nu(kmap, golden_torus, GaussianKernel(4.0, 0.01), (0.0, 0.0), grid)
        assert 0.0 < growth_integral(nu, shift) <= 1.0

    def test_growth_integral_above_zero_is_empty(self):
        grid = YGrid.from_bounds(1.0, 2.0, 0.05)
        nu = CylinderMeasure((0.0,), grid, np.ones((1, grid.size)), 1.0)
        assert growth_integral(nu) == 0.0


class TestIdentityFlow:
    """A fixed point has constant Keller weights, so smoothing only scales them by the kernel mass"""

    @pytest.fixture(scope="class")
    def still(self):
        return identity_flow(torus_space())

    @pytest.mark.parametrize("rho", [1.0, 3.0])
    def test_densities_are_constant(self, kmap, still, kernel, grid, rho):
        m = (0.7, 4.2)
        nu = build_nu(kmap, still, kernel, m, grid, rho)
        expected = rho * kmap.weights(m) * kernel.mass
        for row, h in zip(nu.densities, expected):
            assert row == pytest.approx(np.full(grid.size, h), rel=1e-12)

    @pytest.mark.parametrize("tau", [0.05, 0.5, 1.0])
    def test_no_equivariance_defect(self, kmap, still, kernel, grid, tau):
        assert equivariance_defect(kmap, still, kernel, (0.7, 4.2), tau, grid) == pytest.approx(0.0, abs=1e-15)

    def test_injectivity_gap_of_the_constant_probe(self, kmap, still, kernel, grid):
        m1, m2 = (0.0, 0.0), (1.0, 2.0)
        expected = abs(kmap.weights(m1).sum() - kmap.weights(m2).sum()) * kernel.mass
        assert expected > 1e-3
        probe = TestFunction("one", 0, 0.0)
        assert injectivity_gap(kmap, still, kernel, m1, m2, probe, grid) == pytest.approx(expected, rel=1e-9)


class TestInjectivity:
    def test_every_anchor_pair_is_separated(self, kmap, golden_torus):
        kernel = GaussianKernel(1.0, 0.05)
        grid = YGrid.from_bounds(-0.25, 0.25, 0.05)
        for m1, m2 in anchor_pairs(kmap):
            separated, gap = distinguishes(kmap, golden_torus, kernel, m1, m2, grid)
            assert separated and gap > 0.0, (m1, m2)

    def test_equal_points_have_no_gap(self, kmap, golden_torus, kernel, grid):
        probe = TestFunction("cos", 1, 0.0)
        assert injectivity_gap(kmap, golden_torus, kernel, (1.0, 2.0), (1.0, 2.0), probe, grid) <= 1e-14
        assert distinguishes(kmap, golden_torus, kernel, (1.0, 2.0), (1.0, 2.0), grid) == (False, 0.0)

    def test_distant_points_are_separated(self, kmap, golden_torus, kernel, grid, rng):
        for m1, m2 in random_torus_pairs(rng, 10):
            separated, gap = distinguishes(kmap, golden_torus, kernel, m1, m2, grid)
            assert separated and gap > 0.0

    def test_points_on_one_orbit_are_separated(self, kmap, golden_torus, kernel, grid):
        m2 = evaluate_flow(golden_torus, 0.37, (0.0, 0.0))
        probe = TestFunction("one", 0, 0.0)
        assert injectivity_gap(kmap, golden_torus, kernel, (0.0, 0.0), m2, probe, grid) > 0.0


class TestPlaneMeasure:
    def test_constant_density_grows_linearly(self, grid):
        nu = CylinderMeasure((0.0, math.pi), grid, np.full((2, grid.size), 0.3), 1.0)
        plane = to_plane_measure(nu)
        assert plane.ray_density(1) == pytest.approx(0.3 * np.exp(grid.values), rel=1e-15)

    def test_pairing(self, grid):
        nu = CylinderMeasure((0.0,), grid, np.full((1, grid.size), 0.3), 1.0)
        plane = to_plane_measure(nu)
        assert plane.pair(TestFunction("one", 0, 0.0)) == pytest.approx(0.3 * BUMP_INTEGRAL, rel=1e-4)
        assert plane.pair(TestFunction("sin", 1, 0.0)) == 0.0

    def test_growth_integral_is_a_trapezoid_sum(self):
        grid = YGrid.from_bounds(-0.1, 0.1, 0.05)
        nu = CylinderMeasure((0.0, math.pi), grid, np.full((2, grid.size), 0.25), 1.0)
        ys = (-0.1, -0.05, 0.0)
        expected = 0.05 * (0.25 * math.exp(ys[0]) + 0.5 * math.exp(ys[1]) + 0.25 * math.exp(ys[2]))
        assert growth_integral(nu) == pytest.approx(expected, rel=1e-14)

