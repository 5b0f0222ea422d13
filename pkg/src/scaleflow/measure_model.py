#!/usr/bin/env python3
"""
SCALEFLOW - Measure Model (Scaling Flow on M[rho, sigma])
Atomic measures on the punctured plane in log-polar coordinates, the growth class,
the scaling flow T_t, pairings with test functions and a Frechet-type metric

Dependencies:
- errors.py: InvalidInputError for rejected atoms and radii
- periodization.py: Builds periodic measures from AtomicMeasure
- artifacts.py: Reads and writes measures as (y, phi, mass) records

Provides:
- LogPolarAtom, AtomicMeasure, GrowthClass value types
- counting_function, in_growth_class, apply_flow, pair
- TestFunction / FrechetFamily and frechet_distance

Coordinates: an atom at z = e^(y + i*phi) is stored as (y, phi, mass). The flow T_t moves
(y, phi, w) to (y - t, phi, w * e^(-rho*t)). Pairings use math.fsum, so the value of a sum
does not depend on the order of its terms and zero terms never change it.
"""

import math
from dataclasses import dataclass, field
from itertools import groupby
from typing import Iterable, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .dynamics_core import TWO_PI, reduce_angle
from .errors import InvalidInputError

ANGULAR_KINDS = ("one", "cos", "sin")
DEFAULT_FAMILY_SIZE = 64

# Largest x with math.exp(x) finite, rounded down
_MAX_EXPONENT = 709.0


@dataclass(frozen=True, order=True)
class LogPolarAtom:
    """A point mass at log-radius y and angle phi"""

    y: float
    phi: float
    mass: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.y) and math.isfinite(self.phi) and math.isfinite(self.mass)):
            raise InvalidInputError(f"atom ({self.y}, {self.phi}, {self.mass}) is not finite")
        if not self.mass > 0:
            raise InvalidInputError(f"atom mass must be positive, got {self.mass}")
        object.__setattr__(self, "phi", reduce_angle(self.phi))

    @property
    def radius(self) -> float:
        return math.exp(self.y) if self.y <= _MAX_EXPONENT else math.inf


@dataclass(frozen=True)
class GrowthClass:
    """The class M[rho, sigma]: mu(|z| < r) <= sigma * r^rho for all r > 0"""

    rho: float
    sigma: float

    def __post_init__(self) -> None:
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise InvalidInputError(f"rho must be positive, got {self.rho}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidInputError(f"sigma must be positive, got {self.sigma}")


class Pairable(Protocol):
    def pair(self, g: "TestFunction") -> float: ...


@dataclass(frozen=True)
class AtomicMeasure:
    """
    A finite positive atomic measure.

    Atoms are kept sorted by (y, phi, mass) and atoms sharing (y, phi) are merged.
    Build instances with from_atoms/from_triples; the constructor assumes canonical input.
    """

    atoms: Tuple[LogPolarAtom, ...] = field(default_factory=tuple)

    @classmethod
    def from_atoms(cls, atoms: Iterable[LogPolarAtom]) -> "AtomicMeasure":
        ordered = sorted(atoms)
        merged = []
        for (y, phi), group in groupby(ordered, key=lambda a: (a.y, a.phi)):
            masses = [a.mass for a in group]
            merged.append(LogPolarAtom(y, phi, masses[0] if len(masses) == 1 else math.fsum(masses)))
        return cls(tuple(merged))

    @classmethod
    def from_triples(cls, triples: Iterable[Sequence[float]]) -> "AtomicMeasure":
        return cls.from_atoms(LogPolarAtom(float(y), float(phi), float(w)) for y, phi, w in triples)

    @classmethod
    def empty(cls) -> "AtomicMeasure":
        return cls(())

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def total_mass(self) -> float:
        return math.fsum(a.mass for a in self.atoms)

    def triples(self) -> List[Tuple[float, float, float]]:
        return [(a.y, a.phi, a.mass) for a in self.atoms]

    def pair(self, g: "TestFunction") -> float:
        return pair(self, g)


# ---------------------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------------------


def bump(u: float) -> float:
    """exp(1 - 1/(1 - u^2)) on |u| < 1, exactly 0 elsewhere; equals 1 at u = 0"""
    if not -1.0 < u < 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - u * u))


@dataclass(frozen=True)
class TestFunction:
    """A separable test function psi(phi, y) = Phi(phi) * R(y) on the cylinder"""

    __test__ = False  # not a pytest class

    kind: str
    n: int
    center: float
    half_width: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ANGULAR_KINDS:
            raise InvalidInputError(f"angular kind must be one of {ANGULAR_KINDS}")
        if self.kind == "one" and self.n != 0:
            raise InvalidInputError("the constant angular factor has harmonic index 0")
        if self.kind != "one" and self.n < 1:
            raise InvalidInputError(f"{self.kind} harmonics need n >= 1")
        if not self.half_width > 0:
            raise InvalidInputError("radial half-width must be positive")

    @property
    def support(self) -> Tuple[float, float]:
        return (self.center - self.half_width, self.center + self.half_width)

    def angular(self, phi: float) -> float:
        if self.kind == "one":
            return 1.0
        if self.kind == "cos":
            return math.cos(self.n * phi)
        return math.sin(self.n * phi)

    def radial(self, y: float) -> float:
        return bump((y - self.center) / self.half_width)

    def radial_array(self, ys: np.ndarray) -> np.ndarray:
        u = (np.asarray(ys, dtype=float) - self.center) / self.half_width
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out

    def angular_array(self, phis: np.ndarray) -> np.ndarray:
        phis = np.asarray(phis, dtype=float)
        if self.kind == "one":
            return np.ones_like(phis)
        if self.kind == "cos":
            return np.cos(self.n * phis)
        return np.sin(self.n * phis)

    def __call__(self, phi: float, y: float) -> float:
        return self.angular(phi) * self.radial(y)

    def label(self) -> str:
        angular = "1" if self.kind == "one" else f"{self.kind}({self.n}phi)"
        return f"{angular}*R[c={self.center:g},h={self.half_width:g}]"


def _center_at(j: int) -> float:
    """0, 1, -1, 2, -2, ..."""
    return float((j + 1) // 2 if j % 2 else -(j // 2))


def enumerate_test_functions(count: int, half_width: float = 1.0) -> List[TestFunction]:
    """
    The first count members of the documented enumeration.

    Diagonal d = 0, 1, 2, ... walks harmonic index n = 0..d with center index j = d - n
    (centers 0, 1, -1, 2, -2, ...). n = 0 contributes the constant angular factor,
    n >= 1 contributes cos(n phi) then sin(n phi).
    """
    members: List[TestFunction] = []
    d = 0
    while len(members) < count:
        for n in range(d + 1):
            c = _center_at(d - n)
            if n == 0:
                members.append(TestFunction("one", 0, c, half_width))
            else:
                members.append(TestFunction("cos", n, c, half_width))
                members.append(TestFunction("sin", n, c, half_width))
        d += 1
    return members[:count]


@dataclass(frozen=True)
class FrechetFamily:
    """A weighted countable family g_1, ..., g_K with weights 2^-k"""

    members: Tuple[TestFunction, ...]

    @classmethod
    def default(cls, size: int = DEFAULT_FAMILY_SIZE) -> "FrechetFamily":
        if size < 1:
            raise InvalidInputError(f"family size must be positive, got {size}")
        return cls(tuple(enumerate_test_functions(size)))

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def weights(self) -> np.ndarray:
        return np.ldexp(1.0, -np.arange(1, self.size + 1))

    def features(self, measure: Pairable) -> np.ndarray:
        """Vector of pairings <measure, g_k>"""
        return np.array([measure.pair(g) for g in self.members], dtype=float)

    def supported_prefix(self, P: float) -> int:
        """Number of leading members whose support [c-h, c+h] lies inside (-P, P)"""
        count = 0
        for g in self.members:
            lo, hi = g.support
            if not (-P < lo and hi < P):
                break
            count += 1
        return count

    def tail_bound(self, P: float) -> float:
        return math.ldexp(1.0, -self.supported_prefix(P))

    def distance_from_features(self, a: np.ndarray, b: np.ndarray) -> float:
        diffs = np.minimum(1.0, np.abs(np.asarray(a) - np.asarray(b)))
        return math.fsum(float(w * d) for w, d in zip(self.weights, diffs))

    def pairwise(self, a_rows: np.ndarray, b_rows: np.ndarray) -> np.ndarray:
        """Distance block between two stacks of feature vectors"""
        a = np.asarray(a_rows, dtype=float)[:, None, :]
        b = np.asarray(b_rows, dtype=float)[None, :, :]
        return np.minimum(1.0, np.abs(a - b)) @ self.weights


# ---------------------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------------------


def counting_function(mu: AtomicMeasure, r: float) -> float:
    """
    Mass of the open disc |z| < r.

    Raises:
        InvalidInputError: r <= 0
    """
    if not r > 0:
        raise InvalidInputError(f"radius must be positive, got {r}")
    log_r = math.log(r)
    return math.fsum(a.mass for a in mu.atoms if a.y < log_r)


def _growth_ratio(mass: float, gc: GrowthClass, y: float) -> float:
    """mass / (sigma * e^(rho y)), in log space once e^(rho y) leaves the float range"""
    exponent = gc.rho * y
    if abs(exponent) <= _MAX_EXPONENT:
        return mass / (gc.sigma * math.exp(exponent))
    if mass == 0.0:
        return 0.0
    log_ratio = math.log(mass) - math.log(gc.sigma) - exponent
    return math.exp(log_ratio) if log_ratio <= _MAX_EXPONENT else math.inf


def in_growth_class(
    mu: AtomicMeasure, gc: GrowthClass, rtol: float = 1e-12
) -> Tuple[bool, float]:
    """
    Check mu(|z| < r) <= sigma * r^rho for all r > 0.

    For an atomic measure the ratio mu(r)/r^rho is largest at the left end of each
    constancy interval, so it is enough to check the mass up to and including each atom
    radius.

    Returns:
        Tuple of (is_member, worst ratio of cumulative mass to sigma * r^rho)
    """
    worst = 0.0
    cumulative: List[float] = []
    for y, group in groupby(mu.atoms, key=lambda a: a.y):
        cumulative.extend(a.mass for a in group)
        ratio = _growth_ratio(math.fsum(cumulative), gc, y)
        worst = max(worst, ratio)
    return worst <= 1.0 + rtol, worst


def apply_flow(mu: AtomicMeasure, t: float, gc: GrowthClass) -> AtomicMeasure:
    """
    The scaling flow T_t mu(E) = mu(e^t E) e^(-rho t).

    Each atom (y, phi, w) maps to (y - t, phi, w e^(-rho t)); masses that underflow to
    zero are dropped.

    Raises:
        InvalidInputError: a moved mass exceeds the float range
    """
    if t == 0:
        return mu
    log_scale = -gc.rho * t
    scale = math.exp(log_scale) if abs(log_scale) <= _MAX_EXPONENT else None
    moved = []
    for a in mu.atoms:
        if scale is not None:
            w = a.mass * scale
        else:
            log_w = math.log(a.mass) + log_scale
            w = math.exp(log_w) if log_w <= _MAX_EXPONENT else math.inf
        if math.isinf(w):
            raise InvalidInputError(
                f"atom at y={a.y} with mass {a.mass} overflows under the flow at t={t}"
            )
        if w > 0:
            moved.append(LogPolarAtom(a.y - t, a.phi, w))
    return AtomicMeasure.from_atoms(moved)


def pair(mu: AtomicMeasure, g: TestFunction) -> float:
    """<mu, g>: sum of mass * Phi(phi) * R(y) over the atoms"""
    return math.fsum(a.mass * g.angular(a.phi) * g.radial(a.y) for a in mu.atoms)


def frechet_distance(mu1: Pairable, mu2: Pairable, fam: FrechetFamily) -> float:
    """
    sum_k 2^-k * min(1, |<mu1, g_k> - <mu2, g_k>|) over the family.

    Symmetric and bounded by 1 - 2^-K.
    """
    return fam.distance_from_features(fam.features(mu1), fam.features(mu2))


def random_class_measure(
    rng: np.random.Generator,
    gc: GrowthClass,
    atoms: int = 4,
    y_range: Tuple[float, float] = (-3.0, 3.0),
    fill: float = 0.9,
) -> AtomicMeasure:
    """
    Random atomic measure inside M[rho, sigma].

    Atoms get uniform log-radii and angles; masses are rescaled so the worst growth ratio
    equals fill.
    """
    ys = rng.uniform(*y_range, size=atoms)
    phis = rng.uniform(0.0, TWO_PI, size=atoms)
    masses = rng.uniform(0.1, 1.0, size=atoms)
    mu = AtomicMeasure.from_triples(zip(ys, phis, masses))
    _, worst = in_growth_class(mu, gc)
    factor = fill / worst
    return AtomicMeasure.from_triples((y, phi, w * factor) for y, phi, w in mu.triples())


def window_atoms(mu: AtomicMeasure, lo: float, hi: Optional[float] = None) -> AtomicMeasure:
    """Atoms with lo <= y < hi (hi = +inf when omitted)"""
    upper = math.inf if hi is None else hi
    return AtomicMeasure(tuple(a for a in mu.atoms if lo <= a.y < upper))
