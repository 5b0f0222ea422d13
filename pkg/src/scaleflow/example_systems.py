#!/usr/bin/env python3
"""
SCALEFLOW - Example Systems (Built-in Spaces, Flows and Presets)
Concrete compact spaces and flows, the two-mass measure in M[rho, sigma] and the
named presets addressable from the command line

Dependencies:
- dynamics_core.py: SpaceSpec, FlowSpec, angle helpers
- measure_model.py: AtomicMeasure, GrowthClass, in_growth_class
- cli_runner.py: Resolves --preset names through PRESETS

Provides:
- torus_space / circle_space / real_line_space
- torus_flow(alpha), circle_rotation(), identity_flow(space)
- TwoMassConfig and hom_measure
- Preset, PRESETS, get_preset
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .dynamics_core import (
    TWO_PI,
    FlowSpec,
    Point,
    SpaceSpec,
    circular_distance,
    reduce_angle,
)
from .errors import ConfigError, InvalidInputError
from .measure_model import AtomicMeasure, GrowthClass, LogPolarAtom, in_growth_class

logger = logging.getLogger(__name__)

# Golden ratio conjugate, the default irrational slope
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------------------


def _reduce_all(m: Point) -> Point:
    return tuple(reduce_angle(c) for c in m)


def torus_distance(a: Point, b: Point) -> float:
    """Max of the two circular distances, each normalized by 2*pi; at most 0.5"""
    return max(circular_distance(a[0], b[0]), circular_distance(a[1], b[1])) / TWO_PI


def _torus_grid(count: int) -> List[Point]:
    k = max(1, math.ceil(math.sqrt(count)))
    return [(TWO_PI * i / k, TWO_PI * j / k) for i in range(k) for j in range(k)]


def torus_space() -> SpaceSpec:
    """The flat torus of two angles"""
    return SpaceSpec(
        name="torus",
        dimension=2,
        metric=torus_distance,
        diameter=0.5,
        sampler=_torus_grid,
        normalize=_reduce_all,
    )


def circle_distance(a: Point, b: Point) -> float:
    return circular_distance(a[0], b[0]) / TWO_PI


def _circle_grid(count: int) -> List[Point]:
    return [(TWO_PI * i / count,) for i in range(max(1, count))]


def circle_space() -> SpaceSpec:
    """The circle of one angle, arc length normalized by 2*pi"""
    return SpaceSpec(
        name="circle",
        dimension=1,
        metric=circle_distance,
        diameter=0.5,
        sampler=_circle_grid,
        normalize=_reduce_all,
    )


def _line_distance(a: Point, b: Point) -> float:
    return abs(a[0] - b[0])


def _unit_interval_grid(count: int) -> List[Point]:
    if count < 2:
        return [(0.0,)]
    return [(-1.0 + 2.0 * i / (count - 1),) for i in range(count)]


def real_line_space() -> SpaceSpec:
    """
    The real line with |a - b|.

    Not compact: useful for set distances and orbit windows, not for Keller maps. The
    sampler covers [-1, 1].
    """
    return SpaceSpec(
        name="real-line",
        dimension=1,
        metric=_line_distance,
        diameter=math.inf,
        sampler=_unit_interval_grid,
    )


# ---------------------------------------------------------------------------------------
# Flows
# ---------------------------------------------------------------------------------------


def torus_flow(alpha: float = GOLDEN) -> FlowSpec:
    """
    Linear flow T^t (phi, theta) = (phi + 2 pi t, theta + 2 pi alpha t) mod 2 pi.

    Raises:
        InvalidInputError: alpha is not finite
    """
    if not math.isfinite(alpha):
        raise InvalidInputError(f"slope must be finite, got {alpha}")

    def rule(t: float, m: Point) -> Sequence[float]:
        return (m[0] + TWO_PI * t, m[1] + TWO_PI * alpha * t)

    return FlowSpec(torus_space(), rule, name=f"torus(alpha={alpha:.17g})")


def circle_rotation() -> FlowSpec:
    """Unit-speed rotation phi -> phi + t; every orbit has period 2 pi"""

    def rule(t: float, m: Point) -> Sequence[float]:
        return (m[0] + t,)

    return FlowSpec(circle_space(), rule, name="circle-rotation", period=TWO_PI)


def identity_flow(space: SpaceSpec) -> FlowSpec:
    """T^t m = m for every t"""

    def rule(t: float, m: Point) -> Sequence[float]:
        return m

    return FlowSpec(space, rule, name=f"identity({space.name})")


# ---------------------------------------------------------------------------------------
# Two-mass measure
# ---------------------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoMassConfig:
    """
    Two atoms on the positive real ray: mass sigma/2 at radius r1 and sigma/2 - epsilon at r2.

    The masses depend on the growth class, so epsilon is checked against sigma in masses().
    """

    epsilon: float
    r1: float = 1.0
    r2: float = GOLDEN

    def __post_init__(self) -> None:
        if not math.isfinite(self.epsilon):
            raise InvalidInputError(f"epsilon must be finite, got {self.epsilon}")
        if not (self.r1 > 0 and self.r2 > 0 and math.isfinite(self.r1) and math.isfinite(self.r2)):
            raise InvalidInputError(f"radii must be positive, got {self.r1}, {self.r2}")

    def masses(self, sigma: float) -> Tuple[float, float]:
        """
        Raises:
            InvalidInputError: epsilon outside [0, sigma/2]
        """
        half = 0.5 * sigma
        if not 0.0 <= self.epsilon <= half:
            raise InvalidInputError(f"epsilon={self.epsilon} must lie in [0, {half}]")
        return half, half - self.epsilon


def hom_measure(config: TwoMassConfig, gc: GrowthClass) -> AtomicMeasure:
    """
    The two-mass measure for the given class.

    Returns:
        Atoms (log r1, 0, sigma/2) and (log r2, 0, sigma/2 - epsilon); the second atom is
        left out when its mass is zero

    Raises:
        InvalidInputError: epsilon out of range or the measure is not in M[rho, sigma]
    """
    m1, m2 = config.masses(gc.sigma)
    atoms = [LogPolarAtom(math.log(config.r1), 0.0, m1)]
    if m2 > 0:
        atoms.append(LogPolarAtom(math.log(config.r2), 0.0, m2))
    mu = AtomicMeasure.from_atoms(atoms)
    ok, worst = in_growth_class(mu, gc)
    if not ok:
        raise InvalidInputError(
            f"two-mass measure is outside M[{gc.rho}, {gc.sigma}]: worst ratio {worst:.17g}"
        )
    logger.debug("two-mass measure %s, worst ratio %.6g", mu.triples(), worst)
    return mu


# ---------------------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------------------


@dataclass(frozen=True)
class Preset:
    """A named system: a flow with a start point, a measure builder, or both"""

    name: str
    description: str
    flow: Optional[Callable[[], FlowSpec]] = None
    start: Optional[Point] = None
    measure: Optional[Callable[[float, GrowthClass], AtomicMeasure]] = None

    def build_flow(self) -> FlowSpec:
        if self.flow is None:
            raise ConfigError(f"preset {self.name!r} has no flow")
        return self.flow()

    def start_point(self) -> Point:
        if self.start is None:
            raise ConfigError(f"preset {self.name!r} has no start point")
        return self.start

    def build_measure(self, epsilon: float, gc: GrowthClass) -> AtomicMeasure:
        if self.measure is None:
            raise ConfigError(f"preset {self.name!r} has no measure")
        return self.measure(epsilon, gc)


def _two_mass(epsilon: float, gc: GrowthClass) -> AtomicMeasure:
    return hom_measure(TwoMassConfig(epsilon), gc)


PRESETS: Dict[str, Preset] = {
    "torus-golden": Preset(
        "torus-golden",
        "Linear torus flow with slope (sqrt(5) - 1)/2 started at (0, 0)",
        flow=torus_flow,
        start=(0.0, 0.0),
    ),
    "two-mass-default": Preset(
        "two-mass-default",
        "Masses sigma/2 at r = 1 and sigma/2 - epsilon at r = (sqrt(5) - 1)/2",
        measure=_two_mass,
    ),
    "circle-rotation": Preset(
        "circle-rotation",
        "Unit-speed rotation of the circle started at angle 0",
        flow=circle_rotation,
        start=(0.0,),
    ),
    "torus-identity": Preset(
        "torus-identity",
        "Identity flow on the torus started at (0, 0)",
        flow=lambda: identity_flow(torus_space()),
        start=(0.0, 0.0),
    ),
}


def get_preset(name: str) -> Preset:
    """
    Raises:
        ConfigError: unknown preset name
    """
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}, expected one of {sorted(PRESETS)}") from None
