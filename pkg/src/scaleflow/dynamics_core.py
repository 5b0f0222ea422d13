#!/usr/bin/env python3
"""
SCALEFLOW - Dynamics Core (Flows on Compact Metric Spaces)
Generic continuous-time flows, orbit sampling, set distances, (eps, s)-chain search
and pseudo-trajectory defect checks

Dependencies:
- errors.py: InvalidInputError for violated preconditions
- example_systems.py: Builds concrete SpaceSpec/FlowSpec instances on top of this module
- periodization.py: Reuses set_distance for orbit-distance experiments

Provides:
- SpaceSpec / FlowSpec value types and evaluate_flow
- set_distance (two-sided epsilon-neighbourhood distance on finite sets)
- find_chain / is_chain_recurrent_at with an explicit SearchBudget
- adpt_profile / adpt_defect and density_defect for sampled curves
- sample_orbit for finite orbit windows
"""

import bisect
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# Relative slack when deciding how many grid points fit into a closed window
_GRID_SLACK = 1e-9

Point = Tuple[float, ...]
Metric = Callable[[Point, Point], float]


def reduce_angle(angle: float) -> float:
    """Reduce an angle to [0, 2*pi)"""
    reduced = angle % TWO_PI
    if reduced >= TWO_PI:
        # tiny negative inputs round up to 2*pi
        return 0.0
    return reduced


def circular_distance(a: float, b: float) -> float:
    """Arc distance between two angles, in [0, pi]"""
    diff = abs(a - b) % TWO_PI
    return min(diff, TWO_PI - diff)


def _as_coords(m: Sequence[float]) -> Point:
    return tuple(float(c) for c in m)


@dataclass(frozen=True)
class SpaceSpec:
    """A compact metric space known through its metric and a covering sampler"""

    name: str
    dimension: int
    metric: Metric
    diameter: float
    sampler: Callable[[int], List[Point]]
    normalize: Callable[[Point], Point] = _as_coords

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InvalidInputError(f"space {self.name}: dimension must be positive")
        if not self.diameter > 0:
            raise InvalidInputError(f"space {self.name}: diameter must be positive")

    def validate_point(self, m: Sequence[float]) -> Point:
        """
        Check that m belongs to this space and return its normalized coordinates.

        Raises:
            InvalidInputError: dimension mismatch or non-finite coordinate
        """
        coords = _as_coords(m)
        if len(coords) != self.dimension:
            raise InvalidInputError(
                f"point {coords} has dimension {len(coords)}, "
                f"space {self.name} has dimension {self.dimension}"
            )
        if not all(math.isfinite(c) for c in coords):
            raise InvalidInputError(f"point {coords} has a non-finite coordinate")
        return self.normalize(coords)


@dataclass(frozen=True)
class FlowSpec:
    """A flow T^t on a SpaceSpec given by a closed-form evaluation rule"""

    space: SpaceSpec
    rule: Callable[[float, Point], Sequence[float]]
    name: str = "flow"
    # Known period of every orbit, if any; used for exact-return jump candidates
    period: Optional[float] = None

    def evaluate(self, t: float, m: Sequence[float]) -> Point:
        return evaluate_flow(self, t, m)


@dataclass(frozen=True)
class Chain:
    """An (epsilon, s)-chain m_0 ... m_n with jump times t_0 ... t_{n-1}"""

    points: Tuple[Point, ...]
    jump_times: Tuple[float, ...]
    epsilon: float
    s: float

    def __post_init__(self) -> None:
        if len(self.points) != len(self.jump_times) + 1 or not self.jump_times:
            raise InvalidInputError("a chain needs n >= 1 jump times and n + 1 points")

    def to_dict(self) -> Dict[str, object]:
        return {
            "epsilon": self.epsilon,
            "s": self.s,
            "points": [list(p) for p in self.points],
            "jump_times": list(self.jump_times),
        }


@dataclass(frozen=True)
class SampledCurve:
    """A pseudo-trajectory m(t) known on an increasing time grid"""

    times: Tuple[float, ...]
    points: Tuple[Point, ...]

    def __post_init__(self) -> None:
        if not self.times or len(self.times) != len(self.points):
            raise InvalidInputError("curve needs the same positive number of times and points")
        for earlier, later in zip(self.times, self.times[1:]):
            if not later > earlier:
                raise InvalidInputError("curve times must be strictly increasing")

    @classmethod
    def from_orbit(
        cls, flow: FlowSpec, x: Sequence[float], t_min: float, t_max: float, dt: float
    ) -> "SampledCurve":
        """Sample the true trajectory t -> T^t x on the closed grid [t_min, t_max]"""
        points = sample_orbit(flow, x, t_min, t_max, dt)
        times = tuple(t_min + i * dt for i in range(len(points)))
        return cls(times, tuple(points))

    def covers(self, t: float) -> bool:
        return self.times[0] <= t <= self.times[-1]

    def point_at(self, t: float) -> Point:
        """Nearest-time sample; ties go to the earlier sample"""
        idx = bisect.bisect_left(self.times, t)
        if idx <= 0:
            return self.points[0]
        if idx >= len(self.times):
            return self.points[-1]
        before, after = self.times[idx - 1], self.times[idx]
        return self.points[idx - 1] if t - before <= after - t else self.points[idx]


@dataclass(frozen=True)
class SearchBudget:
    """
    Finite search budget for chain search.

    The jump-time grid is (s, s + horizon] with the given step; horizon defaults to 4*s and
    step to s/100. net_size space samples are thinned to an epsilon/2-net, and at most
    max_nodes net nodes are expanded.
    """

    net_size: int = 64
    horizon: Optional[float] = None
    step: Optional[float] = None
    max_nodes: int = 64
    extra_times: Tuple[float, ...] = field(default_factory=tuple)

    def jump_times(self, s: float, period: Optional[float] = None) -> List[float]:
        horizon = self.horizon if self.horizon is not None else 4.0 * s
        step = self.step if self.step is not None else s / 100.0
        if not horizon > 0 or not step > 0:
            raise InvalidInputError("search horizon and step must be positive")

        count = int(math.floor(horizon / step + _GRID_SLACK))
        times = {s + j * step for j in range(1, count + 1)}
        if period is not None and period > 0:
            k = math.floor(s / period) + 1
            while k * period <= s + horizon:
                times.add(k * period)
                k += 1
        times.update(t for t in self.extra_times if s < t <= s + horizon)
        return sorted(t for t in times if t > s)


# ---------------------------------------------------------------------------------------
# Flow evaluation and orbits
# ---------------------------------------------------------------------------------------


def evaluate_flow(flow: FlowSpec, t: float, m: Sequence[float]) -> Point:
    """
    Evaluate T^t m with normalized coordinates.

    Args:
        flow: The flow
        t: Time
        m: Point of the flow's space

    Returns:
        T^t m

    Raises:
        InvalidInputError: m does not belong to the space
    """
    point = flow.space.validate_point(m)
    if not math.isfinite(t):
        raise InvalidInputError(f"flow time must be finite, got {t}")
    return flow.space.normalize(_as_coords(flow.rule(float(t), point)))


def sample_orbit(
    flow: FlowSpec, x: Sequence[float], t_min: float, t_max: float, dt: float
) -> List[Point]:
    """
    Sample T^t x on the grid t_min + i*dt, i = 0 .. floor((t_max - t_min)/dt).

    Raises:
        InvalidInputError: dt <= 0 or t_min >= t_max
    """
    if not dt > 0:
        raise InvalidInputError(f"orbit step must be positive, got {dt}")
    if not t_min < t_max:
        raise InvalidInputError(f"orbit window [{t_min}, {t_max}] is empty")
    count = int(math.floor((t_max - t_min) / dt + _GRID_SLACK)) + 1
    return [evaluate_flow(flow, t_min + i * dt, x) for i in range(count)]


# ---------------------------------------------------------------------------------------
# Set distance
# ---------------------------------------------------------------------------------------


def set_distance(
    e1: Sequence[object],
    e2: Sequence[object],
    metric: Callable[[object, object], float],
    *,
    pairwise: Optional[Callable[[Sequence[object], Sequence[object]], np.ndarray]] = None,
    chunk: int = 32,
) -> float:
    """
    Two-sided epsilon-neighbourhood distance between finite sets.

    The infimum over epsilon with E1 in (E2)_eps and E2 in (E1)_eps is attained on finite
    sets as max(max_{e1} min_{e2} d, max_{e2} min_{e1} d); the strict inequality of the
    neighbourhood does not change the value.

    Args:
        e1: First finite set
        e2: Second finite set
        metric: Point metric
        pairwise: Optional vectorised metric returning the block of distances between
            a slice of e1 and all of e2; used instead of metric when given
        chunk: Rows of e1 evaluated per pairwise block

    Returns:
        The set distance

    Raises:
        InvalidInputError: Either set is empty
    """
    if len(e1) == 0 or len(e2) == 0:
        raise InvalidInputError("set_distance needs two nonempty sets")

    col_min = np.full(len(e2), np.inf)
    row_max = 0.0
    for start in range(0, len(e1), chunk):
        rows = e1[start:start + chunk]
        if pairwise is not None:
            block = np.asarray(pairwise(rows, e2), dtype=float)
        else:
            block = np.array([[metric(a, b) for b in e2] for a in rows], dtype=float)
        row_max = max(row_max, float(block.min(axis=1).max()))
        np.minimum(col_min, block.min(axis=0), out=col_min)

    return max(row_max, float(col_min.max()))


# ---------------------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------------------


def epsilon_net(points: Sequence[Point], metric: Metric, radius: float) -> List[Point]:
    """Greedy net: keep a sample when it is at least radius away from every kept one"""
    net: List[Point] = []
    for p in points:
        if all(metric(p, q) >= radius for q in net):
            net.append(p)
    return net


def validate_chain(flow: FlowSpec, chain: Chain) -> List[str]:
    """
    Revalidate a chain against the flow.

    Returns:
        List of violations (empty if the chain is a valid (epsilon, s)-chain)
    """
    violations = []
    metric = flow.space.metric
    for j, t in enumerate(chain.jump_times):
        if not t > chain.s:
            violations.append(f"link {j}: jump time {t} is not larger than s={chain.s}")
        landed = evaluate_flow(flow, t, chain.points[j])
        error = metric(landed, chain.points[j + 1])
        if not error < chain.epsilon:
            violations.append(f"link {j}: link error {error} is not below epsilon={chain.epsilon}")
    return violations


def _check_chain_args(epsilon: float, s: float) -> None:
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    if not s > 0:
        raise InvalidInputError(f"s must be positive, got {s}")


def _accept(flow: FlowSpec, chain: Chain) -> Optional[Chain]:
    violations = validate_chain(flow, chain)
    if violations:
        logger.debug("discarding chain candidate: %s", "; ".join(violations))
        return None
    return chain


def find_chain(
    flow: FlowSpec,
    m: Sequence[float],
    m2: Sequence[float],
    epsilon: float,
    s: float,
    search: Optional[SearchBudget] = None,
) -> Optional[Chain]:
    """
    Search an (epsilon, s)-chain from m to m2 within a finite budget.

    A single jump is tried first over the whole jump-time grid, choosing the time with
    the smallest link error (earliest on ties). Otherwise a breadth-first search runs over
    an epsilon/2-net of space samples.

    Args:
        flow: The flow
        m: Start point
        m2: End point
        epsilon: Link tolerance
        s: Lower bound for jump times
        search: Search budget (defaults to SearchBudget())

    Returns:
        A revalidated Chain, or None when nothing was found within the budget. None is not
        a proof that no chain exists.

    Raises:
        InvalidInputError: epsilon <= 0 or s <= 0, or points outside the space
    """
    _check_chain_args(epsilon, s)
    start = flow.space.validate_point(m)
    target = flow.space.validate_point(m2)
    budget = search or SearchBudget()
    metric = flow.space.metric
    times = budget.jump_times(s, flow.period)
    if not times:
        logger.debug("empty jump-time grid for s=%g", s)
        return None

    best_time, best_error = times[0], math.inf
    for t in times:
        error = metric(evaluate_flow(flow, t, start), target)
        if error < best_error:
            best_time, best_error = t, error
    if best_error < epsilon:
        chain = _accept(flow, Chain((start, target), (best_time,), epsilon, s))
        if chain is not None:
            return chain

    net = epsilon_net(flow.space.sampler(budget.net_size), metric, epsilon / 2.0)
    logger.debug("single jump failed (best %.3g); searching a net of %d nodes", best_error, len(net))

    # node -1 is the start point; parents map net index -> (parent node, jump time)
    parents: Dict[int, Tuple[int, float]] = {}
    queue = deque([-1])
    expanded = 0
    while queue and expanded < budget.max_nodes:
        node = queue.popleft()
        expanded += 1
        here = start if node < 0 else net[node]
        for t in times:
            landed = evaluate_flow(flow, t, here)
            if metric(landed, target) < epsilon:
                path: List[Point] = [target]
                jumps: List[float] = [t]
                cursor = node
                while cursor >= 0:
                    path.append(net[cursor])
                    cursor, jump = parents[cursor]
                    jumps.append(jump)
                path.append(start)
                chain = _accept(
                    flow, Chain(tuple(reversed(path)), tuple(reversed(jumps)), epsilon, s)
                )
                if chain is not None:
                    return chain
            for j, q in enumerate(net):
                if j not in parents and metric(landed, q) < epsilon:
                    parents[j] = (node, t)
                    queue.append(j)

    logger.debug("no chain found after expanding %d nodes", expanded)
    return None


def is_chain_recurrent_at(
    flow: FlowSpec,
    m: Sequence[float],
    epsilon: float,
    s: float,
    search: Optional[SearchBudget] = None,
) -> Tuple[bool, Optional[Chain]]:
    """
    Check chain recurrence at m for one (epsilon, s) pair.

    Returns:
        Tuple of (found, witness chain from m to m or None)
    """
    chain = find_chain(flow, m, m, epsilon, s, search)
    return chain is not None, chain


# ---------------------------------------------------------------------------------------
# Pseudo-trajectories
# ---------------------------------------------------------------------------------------

READINGS = ("corrected", "literal")


def adpt_profile(
    curve: SampledCurve,
    flow: FlowSpec,
    t: float,
    window: Tuple[float, float],
    tau_step: float,
    reading: str = "corrected",
) -> List[Tuple[float, float]]:
    """
    Deviation of a sampled curve from the flow over a window of increments.

    The corrected reading measures d(T^tau m(t), m(t + tau)); the literal reading
    measures d(T^(t + tau) m(t), m(t + tau)). Curve values between samples are taken
    from the nearest sample in time.

    Returns:
        List of (tau, distance) for tau = a, a + tau_step, ... <= b

    Raises:
        InvalidInputError: Window outside the curve, bad step or unknown reading
    """
    a, b = window
    if reading not in READINGS:
        raise InvalidInputError(f"unknown reading {reading!r}, expected one of {READINGS}")
    if not tau_step > 0:
        raise InvalidInputError(f"tau_step must be positive, got {tau_step}")
    if not a <= b:
        raise InvalidInputError(f"window [{a}, {b}] is empty")
    for probe in (t, t + a, t + b):
        if not curve.covers(probe):
            raise InvalidInputError(
                f"time {probe} outside the curve range [{curve.times[0]}, {curve.times[-1]}]"
            )

    metric = flow.space.metric
    m_t = curve.point_at(t)
    count = int(math.floor((b - a) / tau_step + _GRID_SLACK))
    profile = []
    for k in range(count + 1):
        tau = a + k * tau_step
        flow_time = tau if reading == "corrected" else t + tau
        profile.append((tau, metric(evaluate_flow(flow, flow_time, m_t), curve.point_at(t + tau))))
    return profile


def adpt_defect(
    curve: SampledCurve,
    flow: FlowSpec,
    t: float,
    window: Tuple[float, float],
    tau_step: float,
    reading: str = "corrected",
) -> float:
    """Supremum over the tau grid of the adpt_profile distances"""
    return max(d for _, d in adpt_profile(curve, flow, t, window, tau_step, reading))


def density_defect(
    curve: SampledCurve, cover: Sequence[Point], a: float, *, metric: Metric
) -> float:
    """
    How far the tail {m(t): t >= a} is from being dense, measured on a cover.

    Returns:
        max over cover points p of min over samples with time >= a of d(p, m(t))

    Raises:
        InvalidInputError: Empty cover or a outside the curve range
    """
    if len(cover) == 0:
        raise InvalidInputError("density_defect needs a nonempty cover")
    if not curve.covers(a):
        raise InvalidInputError(
            f"tail start {a} outside the curve range [{curve.times[0]}, {curve.times[-1]}]"
        )
    first = bisect.bisect_left(curve.times, a)
    tail = curve.points[first:]
    return max(min(metric(p, q) for q in tail) for p in cover)
