"""Full-rank planar lattices with exact generators over Q(sqrt2, sqrt3).

A lattice is the integer span of two generator columns.  Both coordinate
projections are required to be injective on the lattice, which over this
field reduces to Q-linear independence of the two entries in each row of
the generator matrix.  The dual lattice is computed exactly as the
inverse-transpose of the generators.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ProjectionNotInjective, SingularLattice
from .field import AlgebraicReal, SQRT2, SQRT3, _rat

__all__ = [
    "LatticePoint",
    "Lattice2D",
    "make_lattice",
    "dual_lattice",
    "enumerate_box",
    "default_lattice",
]


@dataclass(frozen=True)
class LatticePoint:
    """Lattice element m*col1 + n*col2 with exact coordinates."""

    m: int
    n: int
    x: AlgebraicReal
    y: AlgebraicReal

    def __neg__(self):
        return LatticePoint(-self.m, -self.n, -self.x, -self.y)


def _q_independent(u: AlgebraicReal, v: AlgebraicReal) -> bool:
    """True iff u, v are linearly independent over Q (coefficient vectors not proportional)."""
    if u.is_zero() or v.is_zero():
        return False
    cu, cv = u.coeffs, v.coeffs
    for i in range(4):
        for j in range(i + 1, 4):
            if cu[i] * cv[j] != cu[j] * cv[i]:
                return True
    return False


class Lattice2D:
    """Immutable full-rank planar lattice; columns of `gen` are the basis."""

    __slots__ = ("g00", "g01", "g10", "g11", "det", "_inv", "_float_gen", "_float_inv")

    def __init__(self, g00, g01, g10, g11):
        gen = [AlgebraicReal(0) + g for g in (g00, g01, g10, g11)]
        det = gen[0] * gen[3] - gen[1] * gen[2]
        if det.is_zero():
            raise SingularLattice("generator columns are linearly dependent")
        if not _q_independent(gen[0], gen[1]):
            raise ProjectionNotInjective("p1")
        if not _q_independent(gen[2], gen[3]):
            raise ProjectionNotInjective("p2")
        object.__setattr__(self, "g00", gen[0])
        object.__setattr__(self, "g01", gen[1])
        object.__setattr__(self, "g10", gen[2])
        object.__setattr__(self, "g11", gen[3])
        object.__setattr__(self, "det", det)
        inv_det = det.inverse()
        # inverse of [[g00, g01], [g10, g11]]
        inv = (
            gen[3] * inv_det,
            -gen[1] * inv_det,
            -gen[2] * inv_det,
            gen[0] * inv_det,
        )
        object.__setattr__(self, "_inv", inv)
        object.__setattr__(self, "_float_gen", tuple(float(g) for g in gen))
        object.__setattr__(self, "_float_inv", tuple(float(g) for g in inv))

    def __setattr__(self, name, value):
        raise AttributeError("Lattice2D is immutable")

    # -- basic queries -------------------------------------------------

    @property
    def generators(self):
        return (self.g00, self.g01, self.g10, self.g11)

    def det_abs_float(self) -> float:
        return abs(float(self.det))

    def point(self, m: int, n: int) -> LatticePoint:
        return LatticePoint(
            m,
            n,
            self.g00 * m + self.g01 * n,
            self.g10 * m + self.g11 * n,
        )

    def coefficients_of(self, x: AlgebraicReal, y: AlgebraicReal):
        """Exact (m, n) solving gen*(m, n) = (x, y), or None if not in the lattice."""
        i00, i01, i10, i11 = self._inv
        m = i00 * x + i01 * y
        n = i10 * x + i11 * y
        if m.is_integer() and n.is_integer():
            return int(m.as_fraction()), int(n.as_fraction())
        return None

    def contains(self, x: AlgebraicReal, y: AlgebraicReal) -> bool:
        return self.coefficients_of(x, y) is not None

    def dual(self) -> "Lattice2D":
        """Inverse-transpose generators; <gamma, gamma*> is an integer for all pairs."""
        i00, i01, i10, i11 = self._inv
        # transpose of the inverse
        return Lattice2D(i00, i10, i01, i11)

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "generators": [g.to_quadruple() for g in self.generators],
        }

    @classmethod
    def from_json(cls, data) -> "Lattice2D":
        if isinstance(data, str):
            data = json.loads(data)
        quads = data["generators"]
        return cls(*(AlgebraicReal.from_quadruple(q) for q in quads))

    def __eq__(self, other):
        return isinstance(other, Lattice2D) and self.generators == other.generators

    def __hash__(self):
        return hash(self.generators)

    def __repr__(self):
        return f"Lattice2D(det={float(self.det):.6g})"


def make_lattice(gen_rows) -> Lattice2D:
    """Build a lattice from a 2x2 matrix given as [[g00, g01], [g10, g11]]."""
    (g00, g01), (g10, g11) = gen_rows
    return Lattice2D(g00, g01, g10, g11)


def dual_lattice(lattice: Lattice2D) -> Lattice2D:
    return lattice.dual()


def default_lattice() -> Lattice2D:
    """Generators [[1, sqrt2], [sqrt3, 1]]: both projections injective with dense image."""
    return make_lattice([[1, SQRT2], [SQRT3, 1]])


# -- windowed enumeration ---------------------------------------------------


def _float_interval(lo: Fraction, hi: Fraction) -> tuple[float, float]:
    return float(lo), float(hi)


def enumerate_box(lattice: Lattice2D, x1, x2, y1, y2) -> list[LatticePoint]:
    """All lattice points with x in [x1, x2] and y in [y1, y2], exactly.

    Bounds must be rational (int, Fraction, or float taken at its exact
    binary value).  Candidates are located with floating-point ranges plus
    a safety margin; every accepted point is verified with exact
    comparisons, borderline candidates included, so the result is complete.
    """
    x1, x2, y1, y2 = (_rat(v) for v in (x1, x2, y1, y2))
    if x1 > x2 or y1 > y2:
        return []

    fx1, fx2 = _float_interval(x1, x2)
    fy1, fy2 = _float_interval(y1, y2)
    i00, i01, i10, i11 = lattice._float_inv

    # coefficient bounds from the box corners through the inverse matrix
    corners = [(cx, cy) for cx in (fx1, fx2) for cy in (fy1, fy2)]
    m_vals = [i00 * cx + i01 * cy for cx, cy in corners]
    n_vals = [i10 * cx + i11 * cy for cx, cy in corners]
    pad = 2 + 1e-9 * max(1.0, max(abs(v) for v in m_vals + n_vals))
    m_lo = math.floor(min(m_vals) - pad)
    m_hi = math.ceil(max(m_vals) + pad)

    g00f, g01f, g10f, g11f = lattice._float_gen
    ax1, ax2 = AlgebraicReal(x1), AlgebraicReal(x2)
    ay1, ay2 = AlgebraicReal(y1), AlgebraicReal(y2)

    out = []
    for m in range(m_lo, m_hi + 1):
        # n-range from each coordinate constraint, intersected
        lo, hi = min(n_vals) - pad, max(n_vals) + pad
        if g01f != 0.0:
            r1 = (fx1 - g00f * m) / g01f
            r2 = (fx2 - g00f * m) / g01f
            lo = max(lo, min(r1, r2) - 2)
            hi = min(hi, max(r1, r2) + 2)
        if g11f != 0.0:
            r1 = (fy1 - g10f * m) / g11f
            r2 = (fy2 - g10f * m) / g11f
            lo = max(lo, min(r1, r2) - 2)
            hi = min(hi, max(r1, r2) + 2)
        if lo > hi:
            continue
        for n in range(math.floor(lo), math.ceil(hi) + 1):
            x = lattice.g00 * m + lattice.g01 * n
            fx = float(x)
            # wide float reject, exact check near the boundary
            if fx < fx1 - 1e-6 or fx > fx2 + 1e-6:
                continue
            if (fx1 + 1e-6 < fx < fx2 - 1e-6) or (ax1 <= x <= ax2):
                y = lattice.g10 * m + lattice.g11 * n
                fy = float(y)
                if fy < fy1 - 1e-6 or fy > fy2 + 1e-6:
                    continue
                if (fy1 + 1e-6 < fy < fy2 - 1e-6) or (ay1 <= y <= ay2):
                    out.append(LatticePoint(m, n, x, y))
    out.sort(key=lambda p: (p.m, p.n))
    return out
