"""Interval abstract domain over 64-bit floats.

Values are immutable; every operation is a pure function. The lattice is the
usual one: ``TOP = [-inf, +inf]``, ``BOTTOM`` is a distinguished empty value
(never represented as NaN), join is the hull and meet the intersection.

All endpoints are plain Python floats (IEEE-754 binary64), compared bit-exactly
with no epsilon. Strict decision-rule bounds such as ``x > c`` are represented
by closed intervals whose lower endpoint is the float successor of ``c``
(see :func:`float_succ`), so closed intervals are enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

INF = math.inf

__all__ = [
    "INF",
    "Interval",
    "TOP",
    "BOTTOM",
    "Box",
    "abstract",
    "contains",
    "add",
    "join",
    "meet",
    "greater_than",
    "sigmoid",
    "sigmoid_transform",
    "float_succ",
    "singleton",
    "top_box",
    "singleton_box",
    "box_meet",
    "box_contains",
]


def float_succ(value: float) -> float:
    """Smallest float strictly greater than ``value``."""
    return math.nextafter(value, INF)


@dataclass(frozen=True)
class Interval:
    """A closed interval ``[lower, upper]`` or the distinguished empty value.

    Invariants: when not empty, ``lower <= upper`` (infinite endpoints are
    allowed, NaN is not). The empty value carries ``lower=+inf, upper=-inf``
    so that accidental arithmetic on it is loud rather than silently wrong.
    """

    lower: float
    upper: float
    empty: bool = False

    def __post_init__(self) -> None:
        if self.empty:
            object.__setattr__(self, "lower", INF)
            object.__setattr__(self, "upper", -INF)
            return
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("interval endpoints must not be NaN")
        if self.lower > self.upper:
            raise ValueError(f"invalid interval [{self.lower}, {self.upper}]")

    @property
    def is_singleton(self) -> bool:
        return not self.empty and self.lower == self.upper

    def __repr__(self) -> str:
        if self.empty:
            return "Interval.BOTTOM"
        return f"[{self.lower}, {self.upper}]"


TOP = Interval(-INF, INF)
BOTTOM = Interval(0.0, 0.0, empty=True)


def singleton(value: float) -> Interval:
    """Abstraction of a single float: ``[value, value]``."""
    return Interval(value, value)


def abstract(values: Iterable[float]) -> Interval:
    """Abstraction of a finite set of floats: ``[min, max]``; empty set -> BOTTOM."""
    vs = list(values)
    if not vs:
        return BOTTOM
    return Interval(min(vs), max(vs))


def contains(iv: Interval, v: float) -> bool:
    """Membership test for the concretization of ``iv``."""
    return not iv.empty and iv.lower <= v <= iv.upper


def add(a: Interval, b: Interval) -> Interval:
    """Endpoint-wise sum; BOTTOM absorbs. No outward rounding (see module doc)."""
    if a.empty or b.empty:
        return BOTTOM
    return Interval(a.lower + b.lower, a.upper + b.upper)


def join(a: Interval, b: Interval) -> Interval:
    """Hull of the two intervals; BOTTOM is the identity."""
    if a.empty:
        return b
    if b.empty:
        return a
    return Interval(min(a.lower, b.lower), max(a.upper, b.upper))


def meet(a: Interval, b: Interval) -> Interval:
    """Intersection, or BOTTOM when disjoint."""
    if a.empty or b.empty:
        return BOTTOM
    lower = max(a.lower, b.lower)
    upper = min(a.upper, b.upper)
    if lower > upper:
        return BOTTOM
    return Interval(lower, upper)


# Truth-value intervals produced by comparisons.
_FALSE = Interval(0.0, 0.0)
_TRUE = Interval(1.0, 1.0)
_UNKNOWN = Interval(0.0, 1.0)


def greater_than(v: Interval, u: Interval) -> Interval:
    """Abstract ``v > u``: [1,1] definitely true, [0,0] definitely false, [0,1] unknown.

    Definitely true when every point of v exceeds every point of u
    (v.lower > u.upper); definitely false when no point of v exceeds any point
    of u (v.upper <= u.lower). The latter keeps touching endpoints decided,
    which is what makes comparisons of equal singletons exact.
    """
    if v.empty or u.empty:
        raise ValueError("greater_than on an empty interval (logic bug upstream)")
    if v.lower > u.upper:
        return _TRUE
    if v.upper <= u.lower:
        return _FALSE
    return _UNKNOWN


def sigmoid(z: float) -> float:
    """Concrete logistic function 1/(1+e^-z), overflow-safe on both tails."""
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def sigmoid_transform(z: Interval) -> Interval:
    """Abstract sigmoid: endpoint image, valid because sigmoid is monotone."""
    if z.empty:
        return BOTTOM
    return Interval(sigmoid(z.lower), sigmoid(z.upper))


@dataclass(frozen=True)
class Box:
    """One interval per input dimension; the abstract input region.

    A box with any BOTTOM component is treated as empty as a whole.
    """

    dims: tuple[Interval, ...]

    def __len__(self) -> int:
        return len(self.dims)

    @property
    def is_empty(self) -> bool:
        return any(iv.empty for iv in self.dims)

    def __repr__(self) -> str:
        return "Box(" + ", ".join(repr(iv) for iv in self.dims) + ")"


def top_box(n: int) -> Box:
    return Box((TOP,) * n)


def singleton_box(values: Sequence[float]) -> Box:
    return Box(tuple(singleton(v) for v in values))


def box_meet(a: Box, b: Box) -> Box | None:
    """Component-wise meet; ``None`` when any component collapses to BOTTOM."""
    if len(a.dims) != len(b.dims):
        raise ValueError(f"dimension mismatch: {len(a.dims)} vs {len(b.dims)}")
    out = []
    for x, y in zip(a.dims, b.dims):
        m = meet(x, y)
        if m.empty:
            return None
        out.append(m)
    return Box(tuple(out))


def box_contains(box: Box, point: Sequence[float]) -> bool:
    if len(box.dims) != len(point):
        raise ValueError(f"dimension mismatch: {len(box.dims)} vs {len(point)}")
    return all(contains(iv, v) for iv, v in zip(box.dims, point))
