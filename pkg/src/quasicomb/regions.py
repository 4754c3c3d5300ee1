"""Interval unions, the two-sequence staircase partition of the plane, and
the discrete closed point sets it cuts out of a lattice.

The plane is split into a "wide" part (horizontal half-strips reaching
outward, closed in y) and a "tall" part (vertical half-strips reaching
upward, open in y).  With cut sequences xs (0 = xs_0 < xs_1 < ...) and
ys (0 < ys_1 < ys_2 < ...) a point belongs to the wide part iff
|y| <= ys_band(|x|) where band(|x|) is the largest n with xs_{n-1} <= |x|.
Projections of lattice points inside either part are discrete closed sets.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Optional

from .errors import HorizontalLine, NegativePad, WindowExhausted
from .field import AlgebraicReal, _rat
from .lattice import Lattice2D, LatticePoint, enumerate_box

__all__ = [
    "IntervalUnion",
    "Staircase",
    "RegionLabel",
    "PointSet",
    "SetKind",
    "generate_points",
    "line_escape_bound",
    "staircase_polyline",
]


# ---------------------------------------------------------------------------
# interval unions (analysis side: float endpoints)
# ---------------------------------------------------------------------------


class IntervalUnion:
    """Canonical finite union of closed intervals with float endpoints."""

    __slots__ = ("intervals",)

    def __init__(self, intervals=()):
        merged = []
        for lo, hi in sorted((float(lo), float(hi)) for lo, hi in intervals):
            if hi < lo:
                raise ValueError(f"interval [{lo}, {hi}] is reversed")
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        object.__setattr__(self, "intervals", tuple((lo, hi) for lo, hi in merged))

    def __setattr__(self, name, value):
        raise AttributeError("IntervalUnion is immutable")

    @classmethod
    def single(cls, lo, hi) -> "IntervalUnion":
        return cls([(lo, hi)])

    @classmethod
    def empty(cls) -> "IntervalUnion":
        return cls()

    def is_empty(self) -> bool:
        return not self.intervals

    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    def pad(self, eps: float) -> "IntervalUnion":
        """Minkowski sum with [-eps, eps]."""
        if eps < 0:
            raise NegativePad(f"pad radius {eps}")
        return IntervalUnion((lo - eps, hi + eps) for lo, hi in self.intervals)

    def erode(self, eps: float) -> "IntervalUnion":
        """Intervals shrunk by eps on each side; intervals shorter than 2*eps vanish."""
        if eps < 0:
            raise NegativePad(f"erode radius {eps}")
        return IntervalUnion(
            (lo + eps, hi - eps) for lo, hi in self.intervals if hi - lo >= 2 * eps
        )

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(list(self.intervals) + list(other.intervals))

    def intersect(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        for a_lo, a_hi in self.intervals:
            for b_lo, b_hi in other.intervals:
                lo, hi = max(a_lo, b_lo), min(a_hi, b_hi)
                if lo <= hi:
                    out.append((lo, hi))
        return IntervalUnion(out)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= x <= hi + tol for lo, hi in self.intervals)

    def contains_union(self, other: "IntervalUnion", tol: float = 1e-12) -> bool:
        return all(
            any(lo >= a_lo - tol and hi <= a_hi + tol for a_lo, a_hi in self.intervals)
            for lo, hi in other.intervals
        )

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        mirrored = IntervalUnion((-hi, -lo) for lo, hi in self.intervals)
        if len(mirrored.intervals) != len(self.intervals):
            return False
        return all(
            abs(a - c) <= tol and abs(b - d) <= tol
            for (a, b), (c, d) in zip(self.intervals, mirrored.intervals)
        )

    def distance_to(self, x: float) -> float:
        if self.is_empty():
            return math.inf
        best = math.inf
        for lo, hi in self.intervals:
            if lo <= x <= hi:
                return 0.0
            best = min(best, abs(x - lo), abs(x - hi))
        return best

    def symmetric_parts(self):
        """Split a symmetric union into (central half-width, positive pairs).

        Returns (w, [(u1, v1), ...]) where the union is [-w, w] (w = 0 if no
        central component) plus the mirrored pairs [u, v] and [-v, -u],
        0 < u < v.  Raises if the union is not symmetric.
        """
        if not self.is_symmetric():
            raise ValueError("interval union is not symmetric")
        w = 0.0
        pairs = []
        for lo, hi in self.intervals:
            if lo <= 0 <= hi:
                w = hi
            elif lo > 0:
                pairs.append((lo, hi))
        return w, pairs

    def __eq__(self, other):
        return isinstance(other, IntervalUnion) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        return f"IntervalUnion({list(self.intervals)!r})"


# ---------------------------------------------------------------------------
# staircase sequences
# ---------------------------------------------------------------------------


class RegionLabel(enum.Enum):
    WIDE = "wide"  # horizontal strips, contains the x-axis
    TALL = "tall"  # vertical strips, contains the far y-axis


@dataclass(frozen=True)
class Staircase:
    """Cut sequences for the staircase partition.

    x rule: "geometric" gives xs_n = base**n with xs_0 = 0;
            "linear" gives xs_n = step*n; "explicit" uses the given prefix.
    y rule: "linear" gives ys_n = step*n; "geometric" gives ys_n = base**n;
            "explicit" uses the given prefix (1-based).
    All values are exact rationals so region tests against exact
    coordinates are decidable.
    """

    x_rule: tuple
    y_rule: tuple

    @staticmethod
    def default() -> "Staircase":
        return Staircase(("geometric", Fraction(4)), ("linear", Fraction(1)))

    def to_json(self) -> dict:
        def enc(rule):
            kind, arg = rule
            if kind == "explicit":
                return [kind, [[_rat(v).numerator, _rat(v).denominator] for v in arg]]
            return [kind, [_rat(arg).numerator, _rat(arg).denominator]]

        return {"x_rule": enc(self.x_rule), "y_rule": enc(self.y_rule)}

    @classmethod
    def from_json(cls, data) -> "Staircase":
        def dec(rule):
            kind, arg = rule
            if kind == "explicit":
                return (kind, tuple(Fraction(*pair) for pair in arg))
            return (kind, Fraction(*arg))

        return cls(dec(data["x_rule"]), dec(data["y_rule"]))

    def x_cut(self, n: int) -> Fraction:
        """xs_n for n >= 0 (xs_0 = 0 for geometric/linear rules)."""
        kind, arg = self.x_rule[0], self.x_rule[1]
        if n < 0:
            raise ValueError("negative index")
        if kind == "geometric":
            return Fraction(0) if n == 0 else _rat(arg) ** n
        if kind == "linear":
            return _rat(arg) * n
        if kind == "explicit":
            seq = self.x_rule[1]
            if n >= len(seq):
                raise WindowExhausted(f"explicit x sequence has no term {n}")
            return _rat(seq[n])
        raise ValueError(f"unknown rule {kind}")

    def y_cut(self, n: int) -> Fraction:
        """ys_n for n >= 1."""
        kind, arg = self.y_rule[0], self.y_rule[1]
        if n < 1:
            raise ValueError("y cuts start at index 1")
        if kind == "linear":
            return _rat(arg) * n
        if kind == "geometric":
            return _rat(arg) ** n
        if kind == "explicit":
            seq = self.y_rule[1]
            if n - 1 >= len(seq):
                raise WindowExhausted(f"explicit y sequence has no term {n}")
            return _rat(seq[n - 1])
        raise ValueError(f"unknown rule {kind}")

    def band(self, x_abs) -> int:
        """Largest n >= 1 with xs_{n-1} <= |x| (finite: xs_n is unbounded)."""
        value = x_abs if isinstance(x_abs, AlgebraicReal) else AlgebraicReal(_rat(x_abs))
        n = 1
        while True:
            nxt = self.x_cut(n)
            if value.compare(nxt) < 0:
                return n
            n += 1
            if n > 4096:
                raise WindowExhausted("band search exceeded 4096 cuts")

    def classify(self, x, y) -> RegionLabel:
        """Exactly one label per point; the wide part is closed in y."""
        ax = abs(x if isinstance(x, AlgebraicReal) else AlgebraicReal(_rat(x)))
        ay = abs(y if isinstance(y, AlgebraicReal) else AlgebraicReal(_rat(y)))
        n = self.band(ax)
        return RegionLabel.WIDE if ay.compare(self.y_cut(n)) <= 0 else RegionLabel.TALL

    def in_wide(self, point: LatticePoint) -> bool:
        return self.classify(point.x, point.y) is RegionLabel.WIDE


def staircase_polyline(stair: Staircase, n_max: int) -> list[tuple[float, float]]:
    """First-quadrant boundary polyline (mirror across both axes for the rest)."""
    pts = [(float(stair.x_cut(0)), float(stair.y_cut(1)))]
    for n in range(1, n_max + 1):
        x = float(stair.x_cut(n))
        pts.append((x, float(stair.y_cut(n))))
        pts.append((x, float(stair.y_cut(n + 1))))
    return pts


# ---------------------------------------------------------------------------
# generated point sets
# ---------------------------------------------------------------------------


class SetKind(enum.Enum):
    SUPPORT = "support"              # x-projections of wide-region lattice points
    FREQ_FORBIDDEN = "freq_forbidden"  # y-projections of tall-region lattice points
    SPECTRUM = "spectrum"            # x-projections, dual lattice, dual staircase
    TIME_FORBIDDEN = "time_forbidden"  # y-projections, dual lattice, tall dual region
    STAGE_VANISH = "stage_vanish"    # same as TIME_FORBIDDEN truncated to n strips
    NODES = "nodes"                  # y-projections of dual points with |x| < cut


@dataclass(frozen=True)
class PointSet:
    """Sorted exact projection values plus their source lattice points."""

    kind: SetKind
    window: Fraction
    values: tuple          # AlgebraicReal, sorted increasing
    points: tuple          # LatticePoint, aligned with values

    def __len__(self):
        return len(self.values)

    def floats(self) -> list[float]:
        return [float(v) for v in self.values]

    def contains_value(self, v: AlgebraicReal) -> bool:
        fv = float(v)
        floats = self.floats()
        i = bisect.bisect_left(floats, fv - 1e-9)
        j = bisect.bisect_right(floats, fv + 1e-9)
        return any(self.values[k] == v for k in range(i, j))

    def to_csv_rows(self):
        rows = []
        for v, p in zip(self.values, self.points):
            quad = v.to_quadruple()
            flat = [x for pair in quad for x in pair]
            rows.append([float(v)] + flat + [p.m, p.n])
        return rows


def _sorted_set(kind, window, items) -> PointSet:
    """items: list of (value, point); deduplicates on exact value, exact sort."""
    seen = {}
    for v, p in items:
        seen.setdefault(v.coeffs, (v, p))
    # float pre-sort makes the exact comparison sort near-linear
    ordered = sorted(seen.values(), key=lambda vp: float(vp[0]))
    ordered.sort(key=cmp_to_key(lambda u, w: u[0].compare(w[0])))
    return PointSet(
        kind=kind,
        window=_rat(window),
        values=tuple(v for v, _ in ordered),
        points=tuple(p for _, p in ordered),
    )


def generate_points(
    kind: SetKind,
    lattice: Lattice2D,
    stair: Staircase,
    window,
    *,
    stage: Optional[int] = None,
    cut=None,
) -> PointSet:
    """Enumerate a generated set, complete within the window on the projected axis.

    SUPPORT: values x = p1 of lattice points in the wide region, |x| <= window.
    FREQ_FORBIDDEN: values y = p2 of points in the tall region, |y| <= window.
    NODES: values y = p2 of points with |x| < cut, |y| <= window.
    STAGE_VANISH: tall-region y projections using the first `stage` strips.
    TIME_FORBIDDEN: STAGE_VANISH with every available strip; requires
        window <= last y-cut for completeness.
    SPECTRUM: x projections of wide-region points; requires window < the
        largest available x-cut for completeness.
    """
    window = _rat(window)
    if window < 0:
        return _sorted_set(kind, window, [])

    if kind is SetKind.SUPPORT or kind is SetKind.SPECTRUM:
        band = stair.band(window)
        ybound = stair.y_cut(band)
        pts = enumerate_box(lattice, -window, window, -ybound, ybound)
        items = [(p.x, p) for p in pts if stair.in_wide(p)]
        return _sorted_set(kind, window, items)

    if kind is SetKind.NODES:
        if cut is None:
            raise ValueError("NODES needs the x-cut value")
        cut = _rat(cut)
        pts = enumerate_box(lattice, -cut, cut, -window, window)
        acut = AlgebraicReal(cut)
        items = [(p.y, p) for p in pts if abs(p.x) < acut]
        return _sorted_set(kind, window, items)

    if kind in (SetKind.FREQ_FORBIDDEN, SetKind.STAGE_VANISH, SetKind.TIME_FORBIDDEN):
        if kind is SetKind.FREQ_FORBIDDEN:
            n_strips = 0
            probe = 1
            while stair.y_cut(probe) < window:
                n_strips = probe
                probe += 1
                if probe > 4096:
                    raise WindowExhausted("strip search exceeded 4096 cuts")
        else:
            if stage is None:
                raise ValueError("stage-truncated sets need the stage index")
            n_strips = stage
        items = []
        for k in range(1, n_strips + 1):
            xcut = stair.x_cut(k)
            ycut = stair.y_cut(k)
            if ycut >= window:
                continue
            pts = enumerate_box(lattice, -xcut, xcut, -window, window)
            ax = AlgebraicReal(xcut)
            ay = AlgebraicReal(ycut)
            for p in pts:
                if abs(p.x) < ax and abs(p.y) > ay:
                    items.append((p.y, p))
        return _sorted_set(kind, window, items)

    raise ValueError(f"unknown set kind {kind}")


# ---------------------------------------------------------------------------
# straight lines inside the wide region
# ---------------------------------------------------------------------------


def line_escape_bound(stair: Staircase, c, d, horizontal: bool = False, horizon: int = 200):
    """Radius beyond which the line x = c*y + d leaves the wide region.

    The wide region holds (x, y) with |y| <= ys_band(|x|); along the line,
    |x| <= |c|*ys_n + |d| inside strip n, so once xs_{n-1} > |c|*ys_n + |d|
    holds (and keeps holding) the strip contributes nothing.  Returns the
    exact rational bound sup_n min(xs_n, |c|*ys_n + |d|) over strips before
    the escape stage.
    """
    if horizontal:
        raise HorizontalLine("line parallel to the x-axis stays in the wide region")
    c = abs(_rat(c))
    d = abs(_rat(d))
    escape = None
    for n in range(1, horizon + 1):
        if all(
            stair.x_cut(k - 1) > c * stair.y_cut(k) + d
            for k in range(n, min(n + 8, horizon) + 1)
        ):
            escape = n
            break
    if escape is None:
        raise WindowExhausted(f"no escape stage within {horizon} strips")
    bound = Fraction(0)
    for k in range(1, escape):
        bound = max(bound, min(stair.x_cut(k), c * stair.y_cut(k) + d))
    return max(bound, d)
