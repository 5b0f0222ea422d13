#!/usr/bin/env python3
"""
SCALEFLOW - Embedding (Flows into the Measure Flow)
Keller-type map of a compact metric space into K, Gaussian smoothing along trajectories
onto the cylinder S x R, and numerical checks of equivariance and injectivity

Dependencies:
- dynamics_core.py: FlowSpec, SpaceSpec, evaluate_flow
- measure_model.py: TestFunction for probes and plane pairings
- artifacts.py: Serializes CylinderMeasure (JSON and long CSV)

Provides:
- CircleMeasure, KellerMap, keller_embed
- GaussianKernel (trapezoid nodes on [-T_cut, T_cut])
- YGrid, CylinderMeasure, build_nu, shift_nu
- equivariance_defect, injectivity_gap
- PlaneRayMeasure, to_plane_measure, growth_integral

All grids are integer multiples of the kernel step: the kernel nodes, the flow arguments
y - t and the y grid itself. A y grid of step dy therefore requires dy to be a multiple of dt.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .dynamics_core import TWO_PI, FlowSpec, Metric, Point, SpaceSpec, evaluate_flow
from .errors import InvalidInputError
from .measure_model import TestFunction

logger = logging.getLogger(__name__)

_ALIGN_TOL = 1e-9
_INV_SQRT_2PI = 1.0 / math.sqrt(TWO_PI)


def _as_multiple(value: float, step: float, what: str) -> int:
    """Integer k with value == k * step, or InvalidInputError"""
    k = round(value / step)
    if abs(k * step - value) > _ALIGN_TOL * max(1.0, abs(value)):
        raise InvalidInputError(f"{what}={value} is not a multiple of {step}")
    return int(k)


def ray_angles(count: int) -> Tuple[float, ...]:
    """Equispaced angles 2*pi*i/count, i = 0..count-1"""
    return tuple(TWO_PI * i / count for i in range(count))


@dataclass(frozen=True)
class CircleMeasure:
    """A positive measure on the circle with atoms at fixed angles, total mass <= 1"""

    angles: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.angles) != len(self.weights):
            raise InvalidInputError("circle measure needs one weight per angle")
        if len(set(self.angles)) != len(self.angles):
            raise InvalidInputError("circle measure angles must be distinct")
        if any(not 0.0 <= a < TWO_PI for a in self.angles):
            raise InvalidInputError("circle measure angles must lie in [0, 2*pi)")
        if any(not w >= 0.0 for w in self.weights):
            raise InvalidInputError("circle measure weights must be nonnegative")
        if self.total_variation > 1.0:
            raise InvalidInputError(f"total variation {self.total_variation} exceeds 1")

    @property
    def total_variation(self) -> float:
        return math.fsum(self.weights)

    def pair_angular(self, probe: TestFunction) -> float:
        """<Y, Phi>_S using the angular factor of the probe"""
        return math.fsum(w * probe.angular(a) for a, w in zip(self.angles, self.weights))


@dataclass(frozen=True)
class KellerMap:
    """
    Distance-profile map m -> Y(., m) in K.

    Anchor i (1-based) carries the atom at angle 2*pi*(i-1)/N with weight
    2^(-i-1) * (1 + d(m, m_i)/normalizer), so w_i lies in [2^(-i-1), 2^(-i)].
    """

    anchors: Tuple[Point, ...]
    metric: Metric = field(repr=False)
    normalizer: float

    def __post_init__(self) -> None:
        if len(self.anchors) < 2:
            raise InvalidInputError("a Keller map needs at least two anchors")
        if not self.normalizer > 0:
            raise InvalidInputError("normalizer must be positive")
        for i, p in enumerate(self.anchors):
            for q in self.anchors[i + 1:]:
                if not self.metric(p, q) > 0:
                    raise InvalidInputError(f"anchors {p} and {q} coincide")

    @classmethod
    def for_space(cls, space: SpaceSpec, count: int) -> "KellerMap":
        """Anchors taken from the space's covering sampler, normalized by its diameter"""
        anchors = [space.validate_point(p) for p in space.sampler(count)][:count]
        if len(anchors) < count:
            raise InvalidInputError(f"space {space.name} sampled fewer than {count} anchors")
        return cls(tuple(anchors), space.metric, space.diameter)

    @property
    def size(self) -> int:
        return len(self.anchors)

    @property
    def angles(self) -> Tuple[float, ...]:
        return ray_angles(self.size)

    @property
    def scales(self) -> np.ndarray:
        return np.ldexp(1.0, -np.arange(2, self.size + 2))

    def weights(self, m: Point) -> np.ndarray:
        # ratios are clipped at 1 so rounding never pushes a weight above 2^-i
        ratios = np.array(
            [min(1.0, self.metric(m, anchor) / self.normalizer) for anchor in self.anchors]
        )
        return self.scales * (1.0 + ratios)


def keller_embed(kmap: KellerMap, m: Point) -> CircleMeasure:
    """The circle measure Y(., m) in K"""
    return CircleMeasure(kmap.angles, tuple(float(w) for w in kmap.weights(m)))


@dataclass(frozen=True)
class GaussianKernel:
    """Trapezoid quadrature of X(t) = exp(-t^2/2)/sqrt(2 pi) on [-t_cut, t_cut]"""

    t_cut: float = 8.0
    dt: float = 0.01

    def __post_init__(self) -> None:
        if not (self.t_cut > 0 and self.dt > 0):
            raise InvalidInputError("kernel cut and step must be positive")
        _as_multiple(self.t_cut, self.dt, "kernel cut")

    @property
    def half_count(self) -> int:
        return _as_multiple(self.t_cut, self.dt, "kernel cut")

    @property
    def nodes(self) -> np.ndarray:
        n = self.half_count
        return np.arange(-n, n + 1) * self.dt

    @property
    def quadrature_weights(self) -> np.ndarray:
        w = np.full(2 * self.half_count + 1, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w

    @property
    def values(self) -> np.ndarray:
        t = self.nodes
        return _INV_SQRT_2PI * np.exp(-0.5 * t * t)

    @property
    def weighted_values(self) -> np.ndarray:
        return self.quadrature_weights * self.values

    @property
    def mass(self) -> float:
        """Quadrature of X over the nodes; 1 - tail - O(dt^2) <= mass <= 1 up to rounding"""
        return math.fsum(float(v) for v in self.weighted_values)

    @property
    def tail(self) -> float:
        """Kernel mass outside [-t_cut, t_cut]"""
        return math.erfc(self.t_cut / math.sqrt(2.0))


@dataclass(frozen=True)
class YGrid:
    """The grid y_j = j * dy for start <= j <= stop"""

    start: int
    stop: int
    dy: float

    def __post_init__(self) -> None:
        if not self.dy > 0:
            raise InvalidInputError("y grid step must be positive")
        if not self.stop > self.start:
            raise InvalidInputError("y grid needs at least two points")

    @classmethod
    def from_bounds(cls, y_min: float, y_max: float, dy: float) -> "YGrid":
        if not dy > 0:
            raise InvalidInputError("y grid step must be positive")
        return cls(_as_multiple(y_min, dy, "y_min"), _as_multiple(y_max, dy, "y_max"), dy)

    @property
    def size(self) -> int:
        return self.stop - self.start + 1

    @property
    def y_min(self) -> float:
        return self.start * self.dy

    @property
    def y_max(self) -> float:
        return self.stop * self.dy

    @property
    def values(self) -> np.ndarray:
        return np.arange(self.start, self.stop + 1) * self.dy

    def shifted(self, steps: int) -> "YGrid":
        return YGrid(self.start + steps, self.stop + steps, self.dy)


@dataclass(frozen=True, eq=False)
class CylinderMeasure:
    """
    nu on S x R, atomic in angle: ray i at angle phi_i carries density h_i(y) on the grid.

    densities has shape (rays, grid points) and is read-only.
    """

    angles: Tuple[float, ...]
    grid: YGrid
    densities: np.ndarray
    rho: float

    def __post_init__(self) -> None:
        dens = np.array(self.densities, dtype=float)
        if dens.shape != (len(self.angles), self.grid.size):
            raise InvalidInputError(
                f"densities shape {dens.shape} does not match "
                f"{len(self.angles)} rays x {self.grid.size} grid points"
            )
        if not np.all(np.isfinite(dens)):
            raise InvalidInputError("densities must be finite")
        if np.any(dens < 0):
            raise InvalidInputError("densities must be nonnegative")
        if not self.rho > 0:
            raise InvalidInputError("rho must be positive")
        dens.setflags(write=False)
        object.__setattr__(self, "densities", dens)

    def to_dict(self) -> Dict[str, object]:
        return {
            "angles": list(self.angles),
            "y_min": self.grid.y_min,
            "y_max": self.grid.y_max,
            "dy": self.grid.dy,
            "rho": self.rho,
            "densities": [list(map(float, row)) for row in self.densities],
        }


# ---------------------------------------------------------------------------------------
# Trajectory smoothing
# ---------------------------------------------------------------------------------------


def _steps_per_cell(grid: YGrid, kernel: GaussianKernel) -> int:
    ratio = _as_multiple(grid.dy, kernel.dt, "y grid step")
    if ratio < 1:
        raise InvalidInputError("y grid step must be at least the kernel step")
    return ratio


def _trajectory_weights(
    kmap: KellerMap, flow: FlowSpec, kernel: GaussianKernel, m: Point, grid: YGrid
) -> Tuple[np.ndarray, int]:
    """
    Keller weights w_i(T^s m) for s on the kernel-step grid covering y - t.

    Returns:
        Tuple of (array of shape (samples, anchors), cells per y step)
    """
    ratio = _steps_per_cell(grid, kernel)
    n = kernel.half_count
    first = grid.start * ratio - n
    last = grid.stop * ratio + n
    point = flow.space.validate_point(m)
    weights = np.array(
        [kmap.weights(evaluate_flow(flow, k * kernel.dt, point)) for k in range(first, last + 1)]
    )
    return weights, ratio


def _smooth(samples: np.ndarray, kernel: GaussianKernel, ratio: int) -> np.ndarray:
    """
    Quadrature sum_q omega_q X(t_q) F(y - t_q) for every y of the grid.

    samples[k] holds F at s = (first + k) * dt; output rows follow the grid.
    """
    window = 2 * kernel.half_count + 1
    views = sliding_window_view(samples, window, axis=0)[::ratio]
    # window position p holds s = y + t_(n - p), so the kernel is read backwards
    return views @ kernel.weighted_values[::-1]


def build_nu(
    kmap: KellerMap,
    flow: FlowSpec,
    kernel: GaussianKernel,
    m: Point,
    grid: YGrid,
    rho: float = 1.0,
) -> CylinderMeasure:
    """
    Radial densities h_i(y) = rho * sum_q omega_q X(t_q) w_i(T^(y - t_q) m).

    Raises:
        InvalidInputError: dy is not a multiple of the kernel step
    """
    if not rho > 0:
        raise InvalidInputError(f"rho must be positive, got {rho}")
    weights, ratio = _trajectory_weights(kmap, flow, kernel, m, grid)
    h = rho * _smooth(weights, kernel, ratio)
    return CylinderMeasure(kmap.angles, grid, h.T, rho)


def shift_nu(nu: CylinderMeasure, tau: float) -> CylinderMeasure:
    """
    S_tau nu: h_i(y) -> h_i(y + tau), realised by moving the grid window by -tau.

    Raises:
        InvalidInputError: tau is not a multiple of the grid step
    """
    steps = _as_multiple(tau, nu.grid.dy, "tau")
    if steps == 0:
        return nu
    return CylinderMeasure(nu.angles, nu.grid.shifted(-steps), nu.densities, nu.rho)


def _common_window(a: YGrid, b: YGrid) -> Tuple[slice, slice]:
    lo = max(a.start, b.start)
    hi = min(a.stop, b.stop)
    if hi < lo:
        raise InvalidInputError("the two y windows do not overlap")
    return slice(lo - a.start, hi - a.start + 1), slice(lo - b.start, hi - b.start + 1)


def equivariance_defect(
    kmap: KellerMap,
    flow: FlowSpec,
    kernel: GaussianKernel,
    m: Point,
    tau: float,
    grid: YGrid,
    rho: float = 1.0,
) -> float:
    """
    max over rays and the common window of |S_tau nu(., m) - nu(., T^tau m)|.

    Raises:
        InvalidInputError: tau is not grid-aligned
    """
    shifted = shift_nu(build_nu(kmap, flow, kernel, m, grid, rho), tau)
    moved = build_nu(kmap, flow, kernel, evaluate_flow(flow, tau, m), grid, rho)
    left, right = _common_window(shifted.grid, moved.grid)
    diff = np.abs(shifted.densities[:, left] - moved.densities[:, right])
    return float(diff.max())


def injectivity_gap(
    kmap: KellerMap,
    flow: FlowSpec,
    kernel: GaussianKernel,
    m1: Point,
    m2: Point,
    probe: TestFunction,
    grid: YGrid,
) -> float:
    """
    sup over the grid of |(F_1 * X)(y) - (F_2 * X)(y)| with F_j(y) = <Y(., T^y m_j), Phi>.

    A positive gap certifies nu(., m1) != nu(., m2).
    """
    first = _trajectory_weights(kmap, flow, kernel, m1, grid)
    second = _trajectory_weights(kmap, flow, kernel, m2, grid)
    return _probe_gap(kmap, kernel, first, second, probe)


def _probe_gap(
    kmap: KellerMap,
    kernel: GaussianKernel,
    first: Tuple[np.ndarray, int],
    second: Tuple[np.ndarray, int],
    probe: TestFunction,
) -> float:
    phi = probe.angular_array(np.array(kmap.angles))
    (w1, ratio), (w2, _) = first, second
    smoothed_1 = _smooth(w1 @ phi, kernel, ratio)
    smoothed_2 = _smooth(w2 @ phi, kernel, ratio)
    return float(np.max(np.abs(smoothed_1 - smoothed_2)))


# ---------------------------------------------------------------------------------------
# Back to the plane
# ---------------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PlaneRayMeasure:
    """
    A measure on C \\ 0 supported on rays: ray i has radial density h_i(log r) r^rho
    for e^(y_min) <= r <= e^(y_max).
    """

    angles: Tuple[float, ...]
    grid: YGrid
    cylinder_densities: np.ndarray
    rho: float

    @property
    def radii(self) -> np.ndarray:
        return np.exp(self.grid.values)

    def ray_density(self, i: int) -> np.ndarray:
        """Plane density on ray i at the grid radii"""
        return self.cylinder_densities[i] * self.radii ** self.rho

    def pair(self, g: TestFunction) -> float:
        """sum_i Phi(phi_i) * integral R(y) h_i(y) dy by the trapezoid rule"""
        radial = g.radial_array(self.grid.values)
        terms = [
            g.angular(phi) * float(np.trapezoid(radial * row, dx=self.grid.dy))
            for phi, row in zip(self.angles, self.cylinder_densities)
        ]
        return math.fsum(terms)


def to_plane_measure(nu: CylinderMeasure) -> PlaneRayMeasure:
    """Undo the cylinder transplant: f_mu(phi, r) = f_nu(phi, log r) r^rho"""
    return PlaneRayMeasure(nu.angles, nu.grid, nu.densities, nu.rho)


def growth_integral(nu: CylinderMeasure, shift: float = 0.0) -> float:
    """
    Discrete integral over y <= 0 of e^(rho y) sum_i h_i(y) for S_shift nu.

    Only the part of the window with y <= 0 contributes.
    """
    moved = shift_nu(nu, shift)
    ys = moved.grid.values
    keep = ys <= 0.0
    if not np.any(keep):
        return 0.0
    totals = moved.densities[:, keep].sum(axis=0)
    return float(np.trapezoid(np.exp(moved.rho * ys[keep]) * totals, dx=moved.grid.dy))


def anchor_pairs(kmap: KellerMap) -> List[Tuple[Point, Point]]:
    """All unordered pairs of distinct anchors"""
    return [
        (p, q) for i, p in enumerate(kmap.anchors) for q in kmap.anchors[i + 1:]
    ]


def probes(max_harmonic: int) -> List[TestFunction]:
    """Angular probes 1, cos(n phi), sin(n phi) for n <= max_harmonic"""
    out = [TestFunction("one", 0, 0.0)]
    for n in range(1, max_harmonic + 1):
        out.extend([TestFunction("cos", n, 0.0), TestFunction("sin", n, 0.0)])
    return out


def distinguishes(
    kmap: KellerMap,
    flow: FlowSpec,
    kernel: GaussianKernel,
    m1: Point,
    m2: Point,
    grid: YGrid,
    max_harmonic: int = 4,
) -> Tuple[bool, float]:
    """
    Whether some probe up to max_harmonic separates nu(., m1) and nu(., m2).

    Returns:
        Tuple of (separated, largest gap over the probes)
    """
    first = _trajectory_weights(kmap, flow, kernel, m1, grid)
    second = _trajectory_weights(kmap, flow, kernel, m2, grid)
    gaps = [_probe_gap(kmap, kernel, first, second, p) for p in probes(max_harmonic)]
    best = max(gaps)
    return best > 0.0, best


def lipschitz_ratio(kmap: KellerMap, m1: Point, m2: Point) -> float:
    """max_i |w_i(m1) - w_i(m2)| / d(m1, m2); at most 2^-2/normalizer"""
    d = kmap.metric(m1, m2)
    if d == 0:
        return 0.0
    return float(np.max(np.abs(kmap.weights(m1) - kmap.weights(m2)))) / d

