"""Atomic measures cut from a lattice by a weight profile, and their checks:
the weighted Poisson summation identity, translation-bounded norm, support
containment, minimal-gap metrics, and the split into a model-set part plus
a small remainder.

The direct measure places an atom at the first coordinate of every lattice
point, weighted by the profile transform at the second coordinate; the dual
measure mirrors this on the dual lattice with the time-side profile and a
1/det factor.  For a profile whose transform avoids the tall-region
projections, all non-negligible atoms land inside the wide-region
projection set.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ProvenanceMissing, TruncationDominated, WindowMismatch
from .field import AlgebraicReal, _rat
from .lattice import Lattice2D, LatticePoint, enumerate_box
from .regions import PointSet

__all__ = [
    "Atom",
    "AtomicMeasure",
    "GaussianTest",
    "PSFReport",
    "lattice_comb",
    "dual_comb",
    "tb_norm",
    "poisson_check",
    "support_check",
    "min_gap_profile",
    "model_set_split",
]


@dataclass(frozen=True)
class Atom:
    position: float
    weight: float
    exact: Optional[AlgebraicReal] = None
    point: Optional[LatticePoint] = None


@dataclass
class AtomicMeasure:
    """Sorted atom list; positions strictly increasing, no zero weights."""

    atoms: list
    window: float
    source: str = "synthetic"
    dropped_max: float = 0.0

    def __post_init__(self):
        self.atoms = sorted(self.atoms, key=lambda a: a.position)
        for a, b in zip(self.atoms, self.atoms[1:]):
            if not (a.position < b.position):
                raise ValueError("atom positions must be strictly increasing")

    def __len__(self):
        return len(self.atoms)

    def positions(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms])

    def weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms])

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights()))) if self.atoms else 0.0

    def sign_counts(self) -> dict:
        w = self.weights()
        return {
            "positive": int(np.sum(w > 0)),
            "negative": int(np.sum(w < 0)),
        }

    def restrict(self, predicate) -> "AtomicMeasure":
        kept = [a for a in self.atoms if predicate(a)]
        return AtomicMeasure(kept, self.window, self.source, self.dropped_max)

    def to_csv_rows(self):
        rows = []
        for a in self.atoms:
            if a.exact is not None:
                quad = a.exact.to_quadruple()
                flat = [x for pair in quad for x in pair]
            else:
                flat = [""] * 8
            rows.append([a.position] + flat + [a.weight])
        return rows


def _build(
    lattice: Lattice2D,
    profile,                      # callable on arrays of second coordinates
    window: float,
    atom_tol: float,
    y_bound: float,
    scale: float,
    source: str,
) -> AtomicMeasure:
    pts = enumerate_box(lattice, _rat(-window), _rat(window), _rat(-y_bound), _rat(y_bound))
    ys = np.array([float(p.y) for p in pts])
    weights = scale * np.asarray(profile(ys), dtype=float)
    atoms = []
    dropped = 0.0
    for p, wgt in zip(pts, weights):
        if abs(wgt) > atom_tol:
            atoms.append(Atom(position=float(p.x), weight=float(wgt), exact=p.x, point=p))
        elif wgt != 0.0:
            dropped = max(dropped, abs(wgt))
    # distinct lattice points project to distinct positions (injectivity),
    # but float collisions would violate the sorted-atom invariant
    atoms.sort(key=lambda a: a.position)
    merged = []
    for a in atoms:
        if merged and a.position == merged[-1].position:
            merged[-1] = Atom(a.position, merged[-1].weight + a.weight, a.exact, a.point)
        else:
            merged.append(a)
    return AtomicMeasure(merged, window=float(window), source=source, dropped_max=dropped)


def transverse_bound(profile, atom_tol: float, start: float = 1.0, step: float = 1.0, cap: float = 4096.0) -> float:
    """Scan the profile outward until three consecutive unit strips stay
    below the atom tolerance; compact structural support makes this fast."""
    y = start
    quiet = 0
    while y < cap:
        ys = np.linspace(y, y + step, 16)
        if float(np.max(np.abs(profile(ys)))) <= atom_tol:
            quiet += 1
            if quiet >= 3:
                return y + step
        else:
            quiet = 0
        y += step
    return cap


def lattice_comb(
    lattice: Lattice2D,
    profile_hat,
    window: float,
    atom_tol: float = 1e-9,
    y_bound: Optional[float] = None,
) -> AtomicMeasure:
    """Atoms at first coordinates, weights = transform profile at second
    coordinates, for all lattice points within the window."""
    if y_bound is None:
        y_bound = transverse_bound(profile_hat, atom_tol)
    return _build(lattice, profile_hat, window, atom_tol, y_bound, 1.0, source="direct")


def dual_comb(
    lattice: Lattice2D,
    profile,
    window: float,
    atom_tol: float = 1e-9,
    y_bound: Optional[float] = None,
) -> AtomicMeasure:
    """Transform-side measure: atoms on the dual lattice weighted by the
    time-side profile over the determinant."""
    dual = lattice.dual()
    det = abs(float(lattice.det))
    if y_bound is None:
        y_bound = transverse_bound(profile, atom_tol * det)
    return _build(dual, profile, window, atom_tol, y_bound, 1.0 / det, source="dual")


# ---------------------------------------------------------------------------
# translation-bounded norm
# ---------------------------------------------------------------------------


def tb_norm(measure: AtomicMeasure, scan_pad: float = 0.0) -> float:
    """sup over closed unit windows [x, x+1] of the total variation inside.

    The supremum over closed windows is attained with a window endpoint on
    an atom, so both anchorings are scanned; unit masses at consecutive
    integers give 2, not 1, because the window is closed on both sides.
    """
    if not measure.atoms:
        return 0.0
    pos = measure.positions()
    w = np.abs(measure.weights())
    best = 0.0
    for anchor in pos:
        for lo in (anchor, anchor - 1.0):
            i = bisect.bisect_left(pos.tolist(), lo - 1e-15)
            j = bisect.bisect_right(pos.tolist(), lo + 1.0 + 1e-15)
            best = max(best, float(np.sum(w[i:j])))
    return best


# ---------------------------------------------------------------------------
# test functions and the summation identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianTest:
    """g(x) = exp(-pi ((x - center)/width)^2); transform in closed form."""

    center: float = 0.0
    width: float = 1.0

    def eval(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return np.exp(-math.pi * ((xs - self.center) / self.width) ** 2)

    def eval_hat(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return (
            self.width
            * np.exp(-math.pi * (self.width * ts) ** 2)
            * np.exp(-2j * math.pi * self.center * ts)
        )

    def tail_bound(self, radius: float) -> float:
        """Bound on sum over unit windows of sup |g| beyond the radius."""
        r = max(radius - abs(self.center), 0.5)
        u = math.pi * r / self.width
        return 2.0 * self.width * math.exp(-math.pi * (r / self.width) ** 2) * (1.0 + 1.0 / u)

    def tail_bound_hat(self, radius: float) -> float:
        r = max(radius, 0.5)
        u = math.pi * r * self.width
        return 2.0 * math.exp(-math.pi * (self.width * r) ** 2) * (1.0 + 1.0 / u)


@dataclass
class PSFReport:
    entries: list

    def max_relative_gap(self) -> float:
        return max(e["relative_gap"] for e in self.entries)

    def to_json(self) -> dict:
        return {"entries": self.entries, "max_relative_gap": self.max_relative_gap()}


def poisson_check(
    direct: AtomicMeasure,
    dual: AtomicMeasure,
    tests: Sequence[GaussianTest],
    tolerance: float = 1e-6,
    det: float = 1.0,
) -> PSFReport:
    """Both sides of the weighted summation identity by direct summation.

    Left: sum of direct weights times the test transform at atom positions.
    Right: sum of dual weights times the test at dual atom positions.
    Tails beyond the windows are estimated from the Gaussian decay times a
    translation-bounded norm; TruncationDominated is raised when the
    estimate exceeds the tolerance against the right side.
    """
    entries = []
    tb_left = tb_norm(direct)
    tb_right = tb_norm(dual)
    xs = direct.positions()
    wl = direct.weights()
    ss = dual.positions()
    wr = dual.weights()
    for g in tests:
        lhs = complex(np.sum(wl * g.eval_hat(xs)))
        rhs = complex(np.sum(wr * g.eval(ss)))
        tail = tb_left * g.tail_bound_hat(direct.window) + tb_right * g.tail_bound(dual.window)
        denom = max(abs(rhs), 1e-300)
        if tail > tolerance * denom:
            raise TruncationDominated(tail, tolerance * denom)
        gap = abs(lhs - rhs)
        entries.append(
            {
                "center": g.center,
                "width": g.width,
                "lhs_real": lhs.real,
                "lhs_imag": lhs.imag,
                "rhs_real": rhs.real,
                "rhs_imag": rhs.imag,
                "absolute_gap": gap,
                "relative_gap": gap / denom,
                "tail_estimate": tail,
            }
        )
    return PSFReport(entries)


# ---------------------------------------------------------------------------
# support containment and gap metrics
# ---------------------------------------------------------------------------


def support_check(
    measure: AtomicMeasure,
    point_set: PointSet,
    tolerance: float = 1e-6,
    position_tol: float = 1e-9,
):
    """(passes, largest stray weight, worst position): every atom heavier
    than the tolerance must match a set point within the position tolerance."""
    if float(point_set.window) < measure.window - 1e-12:
        raise WindowMismatch(
            f"set window {float(point_set.window)} below measure window {measure.window}"
        )
    floats = point_set.floats()
    stray = 0.0
    worst = None
    for atom in measure.atoms:
        if abs(atom.weight) <= tolerance:
            continue
        matched = False
        if atom.exact is not None and point_set.contains_value(atom.exact):
            matched = True
        else:
            i = bisect.bisect_left(floats, atom.position - position_tol)
            j = bisect.bisect_right(floats, atom.position + position_tol)
            matched = j > i
        if not matched and abs(atom.weight) > stray:
            stray = abs(atom.weight)
            worst = atom.position
    return stray == 0.0, stray, worst


def min_gap_profile(values_by_radius: Callable[[float], Sequence[float]], radii) -> list:
    """(radius, minimal consecutive gap) per radius; nonincreasing in the
    radius since windows nest."""
    out = []
    for r in radii:
        vals = sorted(values_by_radius(r))
        gaps = [b - a for a, b in zip(vals, vals[1:])]
        out.append((float(r), min(gaps) if gaps else math.inf))
    return out


# ---------------------------------------------------------------------------
# model-set split
# ---------------------------------------------------------------------------


def model_set_split(measure: AtomicMeasure, stage: int, staircase) -> tuple:
    """(inside, remainder, tb_norm(remainder)): atoms whose source height is
    within the stage cut form a model-set slice; the rest is the remainder.
    The two parts add back to the measure atom by atom."""
    cut = staircase.y_cut(stage)
    acut = AlgebraicReal(_rat(cut))
    inside_atoms = []
    outside_atoms = []
    for atom in measure.atoms:
        if atom.point is None:
            raise ProvenanceMissing("measure atoms carry no lattice points")
        if abs(atom.point.y) <= acut:
            inside_atoms.append(atom)
        else:
            outside_atoms.append(atom)
    inside = AtomicMeasure(inside_atoms, measure.window, measure.source + "/model")
    outside = AtomicMeasure(outside_atoms, measure.window, measure.source + "/rest")
    return inside, outside, tb_norm(outside)
