"""Exact arithmetic in multiquadratic extensions of the rationals.

An element is a finite sum  sum_d c_d * sqrt(d)  with rational coefficients
c_d and square-free integer radicands d; the radicand 1 carries the rational
part.  Because distinct square roots of square-free integers are linearly
independent over the rationals, an element is zero exactly when all its
coefficients are zero, which makes equality and sign decisions exact.

A :class:`FieldContext` fixes the set of admissible radicands.  The set is
closed under the square-free part of pairwise products, so multiplication
never leaves the declared field.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterable, Mapping


class ContextMismatch(ValueError):
    """Operands belong to different field contexts."""


class NotRepresentable(ValueError):
    """The requested value does not lie in the declared field."""


RationalLike = Fraction | int


def square_free_split(n: int) -> tuple[int, int]:
    """Split ``n >= 1`` as ``s*s*r`` with ``r`` square-free; returns ``(s, r)``.

    Trial division: intended for the small integers that arise from radicand
    products and half-angle cosines, not for cryptographic-size inputs.
    """
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    s, r = 1, 1
    f = 2
    while f * f <= n:
        if n % f == 0:
            e = 0
            while n % f == 0:
                n //= f
                e += 1
            s *= f ** (e // 2)
            if e % 2:
                r *= f
        f += 1 if f == 2 else 2
    return s, r * n


def is_square_free(n: int) -> bool:
    return n >= 1 and square_free_split(n)[0] == 1


@lru_cache(maxsize=4096)
def _sqrt_floor_scaled(d: int, bits: int) -> int:
    """floor(sqrt(d) * 2**bits), so sqrt(d) lies in [f, f+1] / 2**bits."""
    return isqrt(d << (2 * bits))


class FieldContext:
    """A product-closed set of square-free radicands, always containing 1."""

    __slots__ = ("radicands",)

    def __init__(self, radicands: Iterable[int]):
        rads = frozenset(radicands) | {1}
        for d in rads:
            if not is_square_free(d):
                raise ValueError(f"radicand {d} is not a positive square-free integer")
        for a in rads:
            for b in rads:
                g = gcd(a, b)
                if (a // g) * (b // g) not in rads:
                    raise ValueError(
                        f"radicand set not closed: sqrt({a})*sqrt({b}) leaves it"
                    )
        self.radicands = rads

    @classmethod
    def closure(cls, generators: Iterable[int]) -> "FieldContext":
        """Smallest valid context containing all the given radicands."""
        rads = {1}
        for d in generators:
            s, r = square_free_split(d)
            rads.add(r)
        while True:
            extra = set()
            for a in rads:
                for b in rads:
                    g = gcd(a, b)
                    r = (a // g) * (b // g)
                    if r not in rads:
                        extra.add(r)
            if not extra:
                return cls(rads)
            rads |= extra

    def __contains__(self, d: int) -> bool:
        return d in self.radicands

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldContext) and self.radicands == other.radicands

    def __hash__(self) -> int:
        return hash(self.radicands)

    def __repr__(self) -> str:
        return f"FieldContext({sorted(self.radicands)})"

    # -- element factories ------------------------------------------------

    def rational(self, q: RationalLike) -> "FieldElement":
        q = Fraction(q)
        return FieldElement(self, {1: q} if q else {})

    def element(self, coeffs: Mapping[int, RationalLike]) -> "FieldElement":
        out: dict[int, Fraction] = {}
        for d, c in coeffs.items():
            if d not in self.radicands:
                raise NotRepresentable(f"radicand {d} not in context {sorted(self.radicands)}")
            c = Fraction(c)
            if c:
                out[d] = c
        return FieldElement(self, out)

    def sqrt(self, q: RationalLike) -> "FieldElement":
        return sqrt_rational(q, self)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, {})

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, {1: Fraction(1)})

    def parse(self, text: str) -> "FieldElement":
        return parse_machine(text, self)


#: Closure of {3, 5, 11}: every radicand used by the built-in constructions.
DEFAULT_CONTEXT = FieldContext.closure([3, 5, 11])


class FieldElement:
    """Immutable element of a multiquadratic field.

    Stored in canonical form: a map radicand -> nonzero Fraction.  Do not
    mutate the coefficient map; all operations return fresh elements.
    """

    __slots__ = ("ctx", "_coeffs", "_hash", "_float")

    def __init__(self, ctx: FieldContext, coeffs: dict[int, Fraction]):
        self.ctx = ctx
        self._coeffs = coeffs
        self._hash: int | None = None
        self._float: float | None = None

    # -- inspection --------------------------------------------------------

    def items(self) -> list[tuple[int, Fraction]]:
        return sorted(self._coeffs.items())

    def coefficient(self, d: int) -> Fraction:
        return self._coeffs.get(d, Fraction(0))

    def radicand_support(self) -> frozenset[int]:
        return frozenset(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def is_rational(self) -> bool:
        return all(d == 1 for d in self._coeffs)

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise NotRepresentable(f"{self} is irrational")
        return self._coeffs.get(1, Fraction(0))

    # -- ring operations ---------------------------------------------------

    def _check_ctx(self, other: "FieldElement") -> None:
        if self.ctx is not other.ctx and self.ctx != other.ctx:
            raise ContextMismatch(f"contexts differ: {self.ctx} vs {other.ctx}")

    def _lift(self, other: object) -> "FieldElement | None":
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.rational(other)
        return None

    def __add__(self, other: object) -> "FieldElement":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        self._check_ctx(o)
        out = dict(self._coeffs)
        for d, c in o._coeffs.items():
            s = out.get(d, 0) + c
            if s:
                out[d] = s
            else:
                out.pop(d, None)
        return FieldElement(self.ctx, out)

    __radd__ = __add__

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.ctx, {d: -c for d, c in self._coeffs.items()})

    def __sub__(self, other: object) -> "FieldElement":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: object) -> "FieldElement":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other: object) -> "FieldElement":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        self._check_ctx(o)
        rads = self.ctx.radicands
        out: dict[int, Fraction] = {}
        for d1, c1 in self._coeffs.items():
            for d2, c2 in o._coeffs.items():
                g = gcd(d1, d2)
                r = (d1 // g) * (d2 // g)
                if r not in rads:
                    raise NotRepresentable(
                        f"product radicand {r} outside context {sorted(rads)}"
                    )
                c = c1 * c2 * g
                s = out.get(r, 0) + c
                if s:
                    out[r] = s
                else:
                    out.pop(r, None)
        return FieldElement(self.ctx, out)

    __rmul__ = __mul__

    def scale(self, q: RationalLike) -> "FieldElement":
        q = Fraction(q)
        if not q:
            return FieldElement(self.ctx, {})
        return FieldElement(self.ctx, {d: c * q for d, c in self._coeffs.items()})

    # -- comparisons ---------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.ctx == o.ctx and self._coeffs == o._coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(sorted(self._coeffs.items())))
        return self._hash

    def sign(self) -> int:
        """Exact sign: 0 iff the element is zero.

        Nonzero elements are decided by refining each sqrt(d) to an interval,
        starting at 32 bits and doubling until the interval sum excludes zero.
        A nonzero algebraic number is bounded away from zero, so this stops.
        """
        if not self._coeffs:
            return 0
        if self.is_rational():
            q = self._coeffs[1]
            return -1 if q < 0 else 1
        bits = 32
        while True:
            lo, hi = self.interval(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2

    # -- numeric approximation -----------------------------------------------

    def interval(self, bits: int) -> tuple[Fraction, Fraction]:
        """Exact rational enclosure of the value, using sqrt intervals of
        width 2**-bits."""
        lo = Fraction(0)
        hi = Fraction(0)
        scale = 1 << bits
        for d, c in self._coeffs.items():
            if d == 1:
                lo += c
                hi += c
                continue
            f = _sqrt_floor_scaled(d, bits)
            a = Fraction(f, scale)
            b = Fraction(f + 1, scale)
            if c >= 0:
                lo += c * a
                hi += c * b
            else:
                lo += c * b
                hi += c * a
        return lo, hi

    def approx(self, digits: int = 30) -> Fraction:
        """Rational approximation within 10**-digits of the exact value."""
        tol = Fraction(1, 10**digits)
        bits = max(32, int(digits * 3.33) + 8)
        while True:
            lo, hi = self.interval(bits)
            if hi - lo < tol:
                return (lo + hi) / 2
            bits *= 2

    def to_float(self) -> float:
        if self._float is None:
            self._float = float(self.approx(25))
        return self._float

    def to_decimal(self, digits: int = 30) -> str:
        """Decimal string with the requested number of fractional digits."""
        q = self.approx(digits + 2)
        neg = q < 0
        q = -q if neg else q
        scaled = (q.numerator * 10**digits + q.denominator // 2) // q.denominator
        whole, frac = divmod(scaled, 10**digits)
        return f"{'-' if neg else ''}{whole}.{str(frac).rjust(digits, '0')}"

    # -- serialization ---------------------------------------------------------

    def machine(self) -> str:
        """Canonical machine form: comma-joined ``d:num/den`` terms with
        radicands increasing, coefficients in lowest terms; ``0`` if zero."""
        if not self._coeffs:
            return "0"
        return ",".join(
            f"{d}:{c.numerator}/{c.denominator}" for d, c in sorted(self._coeffs.items())
        )

    def __str__(self) -> str:
        if not self._coeffs:
            return "0"
        parts = []
        for d, c in sorted(self._coeffs.items()):
            mag = f"({abs(c.numerator)}/{c.denominator})" if c.denominator != 1 else f"{abs(c.numerator)}"
            term = mag if d == 1 else f"{mag}√{d}"
            parts.append(("-" if c < 0 else "+", term))
        sign0, first = parts[0]
        text = ("-" if sign0 == "-" else "") + first
        for s, term in parts[1:]:
            text += f" {s} {term}"
        return text

    def __repr__(self) -> str:
        return f"FieldElement({self})"


def sqrt_rational(q: RationalLike, ctx: FieldContext) -> FieldElement:
    """The nonnegative square root of a rational, as a field element.

    sqrt(n/d) = sqrt(n*d)/d; the square part of n*d folds into the rational
    coefficient and the square-free part must be a context radicand.
    """
    q = Fraction(q)
    if q < 0:
        raise ValueError(f"square root of negative rational {q}")
    if q == 0:
        return ctx.zero
    s, r = square_free_split(q.numerator * q.denominator)
    if r not in ctx.radicands:
        raise NotRepresentable(
            f"sqrt({q}) needs radicand {r}, not in context {sorted(ctx.radicands)}"
        )
    return FieldElement(ctx, {r: Fraction(s, q.denominator)})


def parse_machine(text: str, ctx: FieldContext) -> FieldElement:
    """Parse the canonical machine form produced by :meth:`FieldElement.machine`."""
    text = text.strip()
    if text == "0":
        return ctx.zero
    coeffs: dict[int, RationalLike] = {}
    for term in text.split(","):
        try:
            rad, frac = term.split(":")
            num, den = frac.split("/")
            d = int(rad)
            c = Fraction(int(num), int(den))
        except ValueError as exc:
            raise ValueError(f"malformed field-element term {term!r}") from exc
        if d in coeffs:
            raise ValueError(f"duplicate radicand {d} in {text!r}")
        coeffs[d] = c
    return ctx.element(coeffs)
