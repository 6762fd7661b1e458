"""Exact planar geometry: points, origin rotations, and distance predicates.

The rotation family ``theta(i)`` turns by arccos((2i-1)/(2i)) about the
origin; it moves every point at distance sqrt(i) from the origin to a point
at distance exactly 1 from where it started, which is what makes these
rotations useful for growing unit-distance graphs.  Half-integer powers are
available whenever the half-angle stays inside the field (rational cosine).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactnum import (
    DEFAULT_CONTEXT,
    FieldContext,
    FieldElement,
    NotRepresentable,
    sqrt_rational,
)


@dataclass(frozen=True)
class Point:
    x: FieldElement
    y: FieldElement

    def __add__(self, other: "Point") -> "Point":
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x - other.x, self.y - other.y)

    def __str__(self) -> str:
        return f"({self.x}, {self.y})"


@dataclass(frozen=True)
class Rotation:
    """Origin rotation held as an exact (cos, sin) pair on the unit circle."""

    cos: FieldElement
    sin: FieldElement

    def __post_init__(self):
        if self.cos * self.cos + self.sin * self.sin != self.cos.ctx.one:
            raise ValueError("cos^2 + sin^2 != 1")

    def inverse(self) -> "Rotation":
        return Rotation(self.cos, -self.sin)

    def compose(self, other: "Rotation") -> "Rotation":
        return Rotation(
            self.cos * other.cos - self.sin * other.sin,
            self.sin * other.cos + self.cos * other.sin,
        )


def origin(ctx: FieldContext = DEFAULT_CONTEXT) -> Point:
    return Point(ctx.zero, ctx.zero)


def identity(ctx: FieldContext = DEFAULT_CONTEXT) -> Rotation:
    return Rotation(ctx.one, ctx.zero)


def theta(i: int, ctx: FieldContext = DEFAULT_CONTEXT) -> Rotation:
    """Rotation about the origin with cosine (2i-1)/(2i), for positive i."""
    if i < 1:
        raise ValueError(f"theta index must be positive, got {i}")
    cos = ctx.rational(Fraction(2 * i - 1, 2 * i))
    sin = sqrt_rational(Fraction(4 * i - 1, 4 * i * i), ctx)
    return Rotation(cos, sin)


def half_angle(r: Rotation) -> Rotation:
    """Half of a rotation with rational cosine (angle taken in (-pi, pi])."""
    c = r.cos.as_rational()  # raises NotRepresentable for irrational cosines
    ctx = r.cos.ctx
    cos_h = sqrt_rational(Fraction(1 + c, 2), ctx)
    sin_h = sqrt_rational(Fraction(1 - c, 2), ctx)
    if r.sin.sign() < 0:
        sin_h = -sin_h
    return Rotation(cos_h, sin_h)


def power(r: Rotation, k: int | Fraction) -> Rotation:
    """k-fold application of r for integer or half-integer k."""
    k = Fraction(k)
    if k.denominator == 2:
        try:
            return power(half_angle(r), k.numerator)
        except NotRepresentable as exc:
            raise NotRepresentable(f"half power of {r} not representable: {exc}") from exc
    if k.denominator != 1:
        raise ValueError(f"only integer and half-integer powers are supported, got {k}")
    n = k.numerator
    base = r if n >= 0 else r.inverse()
    n = abs(n)
    acc = identity(r.cos.ctx)
    while n:
        if n & 1:
            acc = acc.compose(base)
        base = base.compose(base)
        n >>= 1
    return acc


def apply(r: Rotation, p: Point) -> Point:
    return Point(p.x * r.cos - p.y * r.sin, p.x * r.sin + p.y * r.cos)


def dist_sq(p: Point, q: Point) -> FieldElement:
    dx = p.x - q.x
    dy = p.y - q.y
    return dx * dx + dy * dy


def unit_distance(p: Point, q: Point) -> bool:
    return dist_sq(p, q) == p.x.ctx.one


def reflect_x(p: Point) -> Point:
    """Reflection in the horizontal axis."""
    return Point(p.x, -p.y)
