#!/usr/bin/env python3
"""
SCALEFLOW - Periodization (Periodic Approximation of Measures)
Truncation to the fundamental annulus, periodic extension under the scaling flow and the
convergence experiments for measures and their orbits

Dependencies:
- measure_model.py: AtomicMeasure, TestFunction, FrechetFamily, apply_flow
- dynamics_core.py: set_distance for orbit distances
- cli_runner.py: Runs the approximate and orbit-dist experiments

Provides:
- truncate / periodize / pair_periodized / flow_periodized
- convergence_experiment (measures) and orbit_distance_experiment (orbits)
- periodized_growth_constant and orbit_sampling_modulus

The fundamental domain is the half-open band -P <= y < P, so the replicas
T_{2kP} mu* (k in Z) are pairwise disjoint. Replica k sits at y - 2kP with mass
w e^(-2kP rho); replicas are never materialised for pairing.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .dynamics_core import set_distance
from .errors import InvalidInputError
from .measure_model import (
    AtomicMeasure,
    FrechetFamily,
    GrowthClass,
    LogPolarAtom,
    TestFunction,
    apply_flow,
    frechet_distance,
    window_atoms,
)

logger = logging.getLogger(__name__)

# Largest x with math.exp(x) finite, rounded down
_MAX_EXPONENT = 709.0


@dataclass(frozen=True)
class ExperimentRow:
    """One row of an experiment table"""

    P: float
    distance: float


@dataclass(frozen=True)
class PeriodizedMeasure:
    """mu_P = sum over k of T_{2kP} base, with base supported in -P <= y < P"""

    base: AtomicMeasure
    P: float
    gc: GrowthClass

    def __post_init__(self) -> None:
        _check_period(self.P)
        for a in self.base.atoms:
            if not -self.P <= a.y < self.P:
                raise InvalidInputError(f"base atom at y={a.y} outside [-{self.P}, {self.P})")

    @property
    def period(self) -> float:
        return 2.0 * self.P

    def pair(self, g: TestFunction) -> float:
        return pair_periodized(self, g)

    def replicas(self, y_lo: float, y_hi: float) -> AtomicMeasure:
        """Finite piece of mu_P made of the replicas with y_lo <= y < y_hi"""
        span = self.period
        atoms = []
        for a in self.base.atoms:
            k_lo = math.floor((a.y - y_hi) / span)
            k_hi = math.ceil((a.y - y_lo) / span)
            for k in range(k_lo, k_hi + 1):
                y = a.y - k * span
                if not y_lo <= y < y_hi:
                    continue
                mass = _replica_mass(a.mass, -k * span * self.gc.rho)
                if mass > 0:
                    atoms.append(LogPolarAtom(y, a.phi, mass))
        return AtomicMeasure.from_atoms(atoms)


def _replica_mass(mass: float, log_factor: float) -> float:
    """
    mass * e^log_factor.

    Raises:
        InvalidInputError: the product exceeds the float range
    """
    value = mass * math.exp(log_factor) if log_factor <= _MAX_EXPONENT else math.inf
    if math.isinf(value):
        raise InvalidInputError(f"replica mass {mass} * e^{log_factor:g} overflows")
    return value


def _check_period(P: float) -> None:
    if not (P > 0 and math.isfinite(P)):
        raise InvalidInputError(f"half-period P must be positive, got {P}")


def truncate(mu: AtomicMeasure, P: float) -> AtomicMeasure:
    """
    Keep the atoms with -P <= y < P.

    Raises:
        InvalidInputError: P <= 0
    """
    _check_period(P)
    return window_atoms(mu, -P, P)


def periodize(mu: AtomicMeasure, P: float, gc: GrowthClass) -> PeriodizedMeasure:
    """
    Periodic extension of the truncation of mu with period 2P in log-radius.

    Raises:
        InvalidInputError: P <= 0
    """
    return PeriodizedMeasure(truncate(mu, P), P, gc)


def pair_periodized(pm: PeriodizedMeasure, g: TestFunction) -> float:
    """
    Exact <mu_P, g>: only the finitely many replicas meeting the radial support of g
    contribute, so the sum has no truncation error.
    """
    lo, hi = g.support
    span = pm.period
    terms = []
    for a in pm.base.atoms:
        phi_factor = g.angular(a.phi)
        if phi_factor == 0.0:
            continue
        # replica k meets (lo, hi) iff lo < y - k*span < hi
        for k in range(math.floor((a.y - hi) / span), math.ceil((a.y - lo) / span) + 1):
            r = g.radial(a.y - k * span)
            if r != 0.0:
                terms.append(_replica_mass(a.mass, -k * span * pm.gc.rho) * phi_factor * r)
    return math.fsum(terms)


def flow_periodized(pm: PeriodizedMeasure, t: float) -> PeriodizedMeasure:
    """
    Apply T_t to mu_P and fold the result back into -P <= y < P.

    Whole periods of t are removed first, so t = 2P returns the same measure exactly.
    """
    span = pm.period
    shift = t - span * math.floor(t / span)
    if shift >= span:
        shift = 0.0
    if shift == 0.0:
        return pm

    rho = pm.gc.rho
    atoms = []
    for a in pm.base.atoms:
        y = a.y - shift
        exponent = shift
        if y < -pm.P:
            # replica of the next period: T_{-2P} adds one period of mass
            y += span
            exponent -= span
        mass = _replica_mass(a.mass, -rho * exponent)
        if mass > 0:
            atoms.append(LogPolarAtom(y, a.phi, mass))
    return PeriodizedMeasure(AtomicMeasure.from_atoms(atoms), pm.P, pm.gc)


def periodized_growth_constant(gc: GrowthClass, P: float) -> float:
    """
    A growth constant for mu_P when mu is in M[rho, sigma].

    One replica can straddle a given radius and contributes at most sigma r^rho; the
    inner replicas form a geometric series with ratio e^(-2 rho P).
    """
    _check_period(P)
    q = math.exp(-2.0 * gc.rho * P)
    return gc.sigma * (1.0 + 1.0 / (1.0 - q))


# ---------------------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------------------


def _check_periods(periods: Sequence[float]) -> List[float]:
    values = [float(p) for p in periods]
    if not values:
        raise InvalidInputError("at least one period is required")
    for p in values:
        _check_period(p)
    for earlier, later in zip(values, values[1:]):
        if not later > earlier:
            raise InvalidInputError("periods must be strictly increasing")
    return values


def convergence_experiment(
    mu: AtomicMeasure, periods: Sequence[float], fam: FrechetFamily, gc: GrowthClass
) -> List[ExperimentRow]:
    """
    Distance between mu_P and mu for every P.

    Returns:
        Rows (P_n, frechet_distance(periodize(mu, P_n), mu))
    """
    rows = []
    for P in _check_periods(periods):
        distance = frechet_distance(periodize(mu, P, gc), mu, fam)
        logger.debug("approximate: P=%g distance=%.17g", P, distance)
        rows.append(ExperimentRow(P, distance))
    return rows


def _grid(lo: float, hi: float, dt: float) -> List[float]:
    if not dt > 0:
        raise InvalidInputError(f"orbit step must be positive, got {dt}")
    if not lo < hi:
        raise InvalidInputError(f"time window [{lo}, {hi}] is empty")
    count = int(math.floor((hi - lo) / dt + 1e-9)) + 1
    return [lo + i * dt for i in range(count)]


def orbit_features(
    mu: AtomicMeasure, fam: FrechetFamily, gc: GrowthClass, t_window: Tuple[float, float], dt: float
) -> np.ndarray:
    """Feature vectors of T_t mu on the grid of t_window"""
    return np.array([fam.features(apply_flow(mu, t, gc)) for t in _grid(*t_window, dt)])


def periodized_orbit_features(pm: PeriodizedMeasure, fam: FrechetFamily, dt: float) -> np.ndarray:
    """Feature vectors of one period of the orbit of mu_P, t in [0, 2P]"""
    return np.array([fam.features(flow_periodized(pm, t)) for t in _grid(0.0, pm.period, dt)])


def orbit_distance_experiment(
    mu: AtomicMeasure,
    periods: Sequence[float],
    fam: FrechetFamily,
    gc: GrowthClass,
    t_window: Tuple[float, float],
    dt: float,
) -> List[ExperimentRow]:
    """
    Set distance between the sampled orbit of mu_P and the sampled orbit of mu.

    The orbit of mu is sampled on t_window, the periodic orbit over one period [0, 2P].
    Orbit points are compared through their feature vectors, which gives the same
    distance as frechet_distance up to summation rounding.

    Returns:
        Rows (P_n, D_n)
    """
    values = _check_periods(periods)
    reference = orbit_features(mu, fam, gc, t_window, dt)
    rows = []
    for P in values:
        approx = periodized_orbit_features(periodize(mu, P, gc), fam, dt)
        distance = set_distance(approx, reference, fam.distance_from_features, pairwise=fam.pairwise)
        logger.debug("orbit-dist: P=%g points=%d distance=%.17g", P, len(approx), distance)
        rows.append(ExperimentRow(P, distance))
    return rows


def orbit_sampling_modulus(
    mu: AtomicMeasure,
    fam: FrechetFamily,
    gc: GrowthClass,
    t_window: Tuple[float, float],
    dt: float,
) -> float:
    """Largest distance between consecutive orbit samples of mu at step dt"""
    features = orbit_features(mu, fam, gc, t_window, dt)
    if len(features) < 2:
        return 0.0
    steps = np.minimum(1.0, np.abs(np.diff(features, axis=0))) @ fam.weights
    return float(steps.max())
