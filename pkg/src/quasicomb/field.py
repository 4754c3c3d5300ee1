"""Exact arithmetic over the real quartic field Q(sqrt2, sqrt3).

Every value is a + b*sqrt(2) + c*sqrt(3) + d*sqrt(6) with rational
coefficients kept in lowest terms.  The basis (1, sqrt2, sqrt3, sqrt6)
is linearly independent over Q, so equality is coefficient-wise and a
value is zero iff all four coefficients vanish.  Sign determination is
exact: the zero test first, then interval refinement with dyadic
square-root enclosures of doubling precision.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import isqrt
from numbers import Rational

__all__ = ["AlgebraicReal", "ZERO", "ONE", "SQRT2", "SQRT3", "SQRT6"]


def _rat(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)  # exact binary value of the float
    if isinstance(v, Rational):
        return Fraction(v)
    raise TypeError(f"not a rational value: {v!r}")


@lru_cache(maxsize=64)
def _sqrt_enclosure(n: int, prec: int) -> tuple[Fraction, Fraction]:
    """Dyadic lo <= sqrt(n) <= hi with hi - lo = 2**-prec."""
    s = isqrt(n << (2 * prec))
    return Fraction(s, 1 << prec), Fraction(s + 1, 1 << prec)


def _mul_bounds(coef: Fraction, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    if coef >= 0:
        return coef * lo, coef * hi
    return coef * hi, coef * lo


class AlgebraicReal:
    """Immutable exact element of Q(sqrt2, sqrt3)."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a=0, b=0, c=0, d=0):
        object.__setattr__(self, "a", _rat(a))
        object.__setattr__(self, "b", _rat(b))
        object.__setattr__(self, "c", _rat(c))
        object.__setattr__(self, "d", _rat(d))

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraicReal is immutable")

    # -- constructors ------------------------------------------------

    @classmethod
    def from_rational(cls, q) -> "AlgebraicReal":
        return cls(_rat(q))

    @classmethod
    def from_quadruple(cls, quad) -> "AlgebraicReal":
        """quad: four [numerator, denominator] integer pairs."""
        return cls(*(Fraction(int(p), int(q)) for p, q in quad))

    def to_quadruple(self):
        return [[f.numerator, f.denominator] for f in self.coeffs]

    # -- structure ---------------------------------------------------

    @property
    def coeffs(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def is_rational(self) -> bool:
        return not (self.b or self.c or self.d)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is irrational")
        return self.a

    def is_integer(self) -> bool:
        return self.is_rational() and self.a.denominator == 1

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return AlgebraicReal(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return AlgebraicReal(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __neg__(self):
        return AlgebraicReal(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        a1, b1, c1, d1 = self.coeffs
        a2, b2, c2, d2 = o.coeffs
        return AlgebraicReal(
            a1 * a2 + 2 * b1 * b2 + 3 * c1 * c2 + 6 * d1 * d2,
            a1 * b2 + b1 * a2 + 3 * (c1 * d2 + d1 * c2),
            a1 * c2 + c1 * a2 + 2 * (b1 * d2 + d1 * b2),
            a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
        )

    __rmul__ = __mul__

    def conjugates(self):
        """Images under sqrt2 -> -sqrt2 and/or sqrt3 -> -sqrt3."""
        a, b, c, d = self.coeffs
        return (
            AlgebraicReal(a, -b, c, -d),
            AlgebraicReal(a, b, -c, -d),
            AlgebraicReal(a, -b, -c, d),
        )

    def inverse(self) -> "AlgebraicReal":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        if self.is_rational():
            return AlgebraicReal(1 / self.a)
        s1, s2, s3 = self.conjugates()
        num = s1 * s2 * s3
        norm = self * num  # rational by Galois symmetry
        assert norm.is_rational() and norm.a != 0
        inv = 1 / norm.a
        return AlgebraicReal(num.a * inv, num.b * inv, num.c * inv, num.d * inv)

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.inverse()

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- exact sign and ordering ---------------------------------------

    def sign(self) -> int:
        """Exact sign: -1, 0 or +1."""
        if self.is_zero():
            return 0
        if self.is_rational():
            return -1 if self.a < 0 else 1
        prec = 32
        while True:
            lo, hi = self._enclosure(prec)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            prec *= 2
            # a nonzero element is bounded away from 0, so this terminates

    def _enclosure(self, prec: int) -> tuple[Fraction, Fraction]:
        lo = self.a
        hi = self.a
        for coef, rad in ((self.b, 2), (self.c, 3), (self.d, 6)):
            if coef:
                slo, shi = _sqrt_enclosure(rad, prec)
                tlo, thi = _mul_bounds(coef, slo, shi)
                lo += tlo
                hi += thi
        return lo, hi

    def compare(self, other) -> int:
        """Exact sign of self - other."""
        o = _coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare with {other!r}")
        return (self - o).sign()

    def __eq__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        if self.is_rational():
            return hash(self.a)
        return hash(self.coeffs)

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    # -- conversions ----------------------------------------------------

    def __float__(self):
        try:
            return (
                float(self.a)
                + float(self.b) * 1.4142135623730951
                + float(self.c) * 1.7320508075688772
                + float(self.d) * 2.449489742783178
            )
        except OverflowError:
            lo, hi = self._enclosure(64)
            return float((lo + hi) / 2)

    def __repr__(self):
        parts = []
        for coef, label in zip(self.coeffs, ("", "*r2", "*r3", "*r6")):
            if coef:
                parts.append(f"{coef}{label}")
        return "AlgebraicReal(0)" if not parts else f"AlgebraicReal({' + '.join(parts)})"


def _coerce(v):
    if isinstance(v, AlgebraicReal):
        return v
    if isinstance(v, (int, float, Fraction, Rational)):
        # floats enter as their exact binary value
        return AlgebraicReal(v)
    return NotImplemented


ZERO = AlgebraicReal(0)
ONE = AlgebraicReal(1)
SQRT2 = AlgebraicReal(0, 1)
SQRT3 = AlgebraicReal(0, 0, 1)
SQRT6 = AlgebraicReal(0, 0, 0, 1)
