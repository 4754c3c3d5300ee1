"""Reproducing kernels on finite interval unions, Gram biorthogonal systems,
smooth rapidly-decaying interpolants, seminorm measurement, and an empirical
density-threshold probe for model-set interpolation.

The space in play is the set of square-integrable functions whose Fourier
transform lives on a fixed symmetric interval union J.  Its reproducing
kernel K_J has the closed form implemented in `_kernels`.  A biorthogonal
family on a finite node set is obtained from the Gram matrix
G[j,k] = K_J(node_j - node_k); the smooth interpolant multiplies each
biorthogonal function by a translated envelope with compactly supported
transform, which upgrades square-integrable decay to faster-than-polynomial
decay while widening the spectrum by at most eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from . import _kernels
from .envelopes import Envelope, gauss_legendre_panels
from .errors import EnvelopeTooWide, IllConditioned, QuadratureNotConverged
from .regions import IntervalUnion

__all__ = [
    "RKernel",
    "BiorthogonalSystem",
    "SchwartzInterpolant",
    "SeminormEstimate",
    "gram_biorth",
    "interpolate_schwartz",
    "seminorm_estimate",
    "interpolation_probe",
    "condition_estimate",
]

MAX_DERIVATIVE = 6


def _split_symmetric(J: IntervalUnion):
    w, pairs = J.symmetric_parts()
    us = np.array([u for u, _ in pairs])
    vs = np.array([v for _, v in pairs])
    return float(w), us, vs


class RKernel:
    """Closed-form reproducing kernel of a symmetric interval union J.

    K_J(x) = int_J e^{2 pi i x t} dt is real and even for J = -J, with
    K_J(0) = mes(J) and |K_J| <= mes(J) everywhere.
    """

    def __init__(self, J: IntervalUnion):
        if not J.is_symmetric():
            raise ValueError("kernel needs a symmetric interval union")
        self.J = J
        self._w, self._us, self._vs = _split_symmetric(J)

    def eval(self, xs, order: int = 0) -> np.ndarray:
        return _kernels.kernel_batch(xs, self._w, self._us, self._vs, order)

    def __call__(self, xs):
        return self.eval(xs, 0)

    def measure(self) -> float:
        return self.J.measure()


def condition_estimate(G: np.ndarray, cho=None) -> float:
    """2-norm condition for small systems, 1-norm LAPACK estimate for large."""
    n = G.shape[0]
    if n <= 600:
        try:
            return float(np.linalg.cond(G))
        except np.linalg.LinAlgError:
            return math.inf
    if cho is None:
        try:
            cho = sla.cho_factor(G, lower=True)
        except sla.LinAlgError:
            return math.inf
    anorm = np.abs(G).sum(axis=0).max()
    rcond, info = sla.lapack.dpocon(cho[0], anorm, uplo=b"L")
    if info != 0 or rcond <= 0.0:
        return math.inf
    return 1.0 / float(rcond)


@dataclass
class BiorthogonalSystem:
    """Minimal-norm biorthogonal family on a truncated node set.

    coeffs[:, j] are the kernel coefficients of the function that is 1 at
    node j and 0 at the others; G @ coeffs = I.
    """

    kernel: RKernel
    nodes: np.ndarray
    gram: np.ndarray
    coeffs: np.ndarray
    condition: float

    def eval(self, xs, order: int = 0) -> np.ndarray:
        """Matrix of biorthogonal values, shape (len(xs), len(nodes))."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        diff = xs[:, None] - self.nodes[None, :]
        kmat = self.kernel.eval(diff.ravel(), order).reshape(diff.shape)
        return kmat @ self.coeffs


def gram_biorth(J: IntervalUnion, nodes, condition_cap: float = 1e10) -> BiorthogonalSystem:
    """Factorize the node Gram and return the biorthogonal family.

    Raises IllConditioned when the condition estimate exceeds the cap,
    which is what near-duplicate nodes or sub-threshold spectral measure
    produce.
    """
    kernel = RKernel(J)
    nodes = np.sort(np.asarray(nodes, dtype=float))
    if len(nodes) != len(set(nodes.tolist())):
        raise IllConditioned(math.inf, condition_cap)
    G = _kernels.gram_matrix(nodes, kernel._w, kernel._us, kernel._vs)
    try:
        cho = sla.cho_factor(G, lower=True)
    except sla.LinAlgError:
        raise IllConditioned(math.inf, condition_cap) from None
    cond = condition_estimate(G, cho)
    if not (cond < condition_cap):
        raise IllConditioned(cond, condition_cap)
    coeffs = sla.cho_solve(cho, np.eye(len(nodes)))
    coeffs = 0.5 * (coeffs + coeffs.T)
    return BiorthogonalSystem(kernel=kernel, nodes=nodes, gram=G, coeffs=coeffs, condition=cond)


class SchwartzInterpolant:
    """f(x) = sum_nodes data(node) * Phi(x - node) * biorth_node(x).

    Interpolates the data on the nodes, has Fourier transform supported in
    J + [-eps, eps] by construction, and inherits faster-than-polynomial
    decay from the envelope.
    """

    def __init__(self, system: BiorthogonalSystem, envelope: Envelope, data, ambient: Optional[IntervalUnion] = None):
        data = np.asarray(data, dtype=float)
        if data.shape != system.nodes.shape:
            raise ValueError("data length does not match node count")
        if ambient is not None and not ambient.contains_union(system.kernel.J.pad(envelope.eps)):
            raise EnvelopeTooWide(
                f"J padded by {envelope.eps} leaves the ambient spectrum region"
            )
        self.system = system
        self.envelope = envelope
        self.data = data
        self.support = system.kernel.J.pad(envelope.eps)
        self._cmat = system.coeffs * data[None, :]  # columns scaled by data
        span = float(np.max(np.abs(system.nodes))) if len(system.nodes) else 1.0
        self._table = envelope.build_table(4.0 * span + 64.0)
        self.node_residual = float(
            np.max(np.abs(self.eval(system.nodes) - data)) if len(data) else 0.0
        )

    # -- time side -------------------------------------------------------

    def eval(self, xs, order: int = 0) -> np.ndarray:
        """f^(order)(xs); derivative orders up to MAX_DERIVATIVE."""
        if order > MAX_DERIVATIVE:
            raise ValueError(f"derivative order {order} above configured max {MAX_DERIVATIVE}")
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        nodes = self.system.nodes
        kernel = self.system.kernel
        diff = xs[:, None] - nodes[None, :]
        flat = diff.ravel()
        out = np.zeros(len(xs))
        binom = 1.0
        for j in range(order + 1):
            if j > 0:
                binom = binom * (order - j + 1) / j
            env_j = self.envelope.eval_table(flat, j, self._table).reshape(diff.shape)
            kmat = kernel.eval(flat, order - j).reshape(diff.shape)
            # sum_l data_l Phi^(j)(x-l) sum_m B[m,l] K^(d)(x-m)
            out += binom * np.sum((env_j * self.data[None, :]) @ self.system.coeffs * kmat, axis=1)
        return out

    def __call__(self, xs):
        return self.eval(xs, 0)

    # -- frequency side ----------------------------------------------------

    def eval_hat(self, ts, tol: float = 1e-10, max_depth: int = 14) -> np.ndarray:
        """Fourier transform values; exactly zero outside J + [-eps, eps].

        For each t the integral over s in (-eps, eps) with t - s in J of
        bump(s) * sum_nodes data * e^{-2 pi i node s} * biorth_hat(t - s)
        is computed by adaptive panel bisection; QuadratureNotConverged is
        raised if the tolerance is not met at the maximum refinement.
        """
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.zeros(len(ts), dtype=complex)
        eps = self.envelope.eps
        J = self.system.kernel.J
        for i, t in enumerate(ts):
            domain = IntervalUnion([(-eps, eps)]).intersect(
                IntervalUnion((t - hi, t - lo) for lo, hi in J.intervals)
            )
            if domain.is_empty():
                out[i] = 0.0
                continue
            total = 0.0 + 0.0j
            for lo, hi in domain.intervals:
                total += self._adaptive_panel(t, lo, hi, tol, max_depth)
            out[i] = total
        return out

    def _hat_integrand(self, t: float, s: np.ndarray) -> np.ndarray:
        nodes = self.system.nodes
        phase_nodes = np.exp(-2j * math.pi * np.outer(s, nodes))  # (ns, N)
        u = phase_nodes @ self._cmat.T  # rows: B @ (data * e(s)) transposed
        back = np.exp(-2j * math.pi * np.outer(t - s, nodes))
        w = np.einsum("ij,ij->i", u, back)
        return self.envelope.bump(s) * w

    def _adaptive_panel(self, t, lo, hi, tol, max_depth) -> complex:
        def integrate(a, b):
            ns, ws = gauss_legendre_panels(a, b, 1)
            return np.sum(ws * self._hat_integrand(t, ns))

        def recurse(a, b, whole, depth):
            mid = 0.5 * (a + b)
            left = integrate(a, mid)
            right = integrate(mid, b)
            err = abs(left + right - whole)
            if err < tol or (b - a) < 1e-13:
                return left + right
            if depth >= max_depth:
                raise QuadratureNotConverged(err, tol)
            return recurse(a, mid, left, depth + 1) + recurse(mid, b, right, depth + 1)

        return recurse(lo, hi, integrate(lo, hi), 0)


def interpolate_schwartz(
    J: IntervalUnion,
    eps: float,
    nodes,
    data,
    ambient: Optional[IntervalUnion] = None,
    condition_cap: float = 1e10,
    envelope_order: int = 1,
) -> SchwartzInterpolant:
    """Solve the node interpolation problem by a smooth function with
    transform supported in J + [-eps, eps]."""
    system = gram_biorth(J, nodes, condition_cap)
    data = np.asarray(data, dtype=float)
    idx = np.argsort(np.asarray(nodes, dtype=float))
    data = data[idx]
    envelope = Envelope(eps, s=envelope_order)
    return SchwartzInterpolant(system, envelope, data, ambient=ambient)


# ---------------------------------------------------------------------------
# seminorms
# ---------------------------------------------------------------------------


@dataclass
class SeminormEstimate:
    """Measured sup over a finite grid of |x^m f^(k)(x)| plus a tail scan."""

    m: int
    k: int
    radius: float
    step: float
    sup: float
    at: float
    tail: float
    tail_radius: float

    @property
    def value(self) -> float:
        return max(self.sup, self.tail)


def seminorm_estimate(f, m: int, k: int, radius: float, step: float = 0.01, tail_factor: float = 4.0) -> SeminormEstimate:
    """Grid sup of |x^m f^(k)(x)| on [-radius, radius] plus a coarse scan
    out to tail_factor * radius; f needs an eval(xs, order) method."""
    xs = np.arange(-radius, radius + step, step)
    vals = np.abs(xs**m * f.eval(xs, k))
    i = int(np.argmax(vals))
    sup, at = float(vals[i]), float(xs[i])
    tail_xs = np.arange(radius, tail_factor * radius, max(step, 0.25))
    tail = 0.0
    if len(tail_xs):
        tvals = np.abs(tail_xs**m * f.eval(tail_xs, k))
        tvals = np.maximum(tvals, np.abs(tail_xs**m * f.eval(-tail_xs, k)))
        tail = float(tvals.max())
    return SeminormEstimate(
        m=m, k=k, radius=radius, step=step, sup=sup, at=at, tail=tail,
        tail_radius=tail_factor * radius,
    )


# ---------------------------------------------------------------------------
# density-threshold probe
# ---------------------------------------------------------------------------


def interpolation_probe(lattice, interval, Omega: IntervalUnion, windows) -> dict:
    """Gram conditioning of cut-and-project nodes for a target spectrum set.

    Nodes are x-projections of lattice points whose y-projection lies in
    `interval`, truncated to each window.  Above the density threshold
    mes(Omega) > |interval| / det the condition estimates stay bounded as
    the window grows; below it they blow up.  Ill-conditioning is data
    here, not an error.
    """
    from .lattice import enumerate_box

    lo, hi = interval
    report = {"windows": [], "interval": [float(lo), float(hi)], "measure": Omega.measure()}
    for R in windows:
        entry = {"window": float(R)}
        if Omega.measure() <= 0.0:
            entry.update(condition=math.inf, singular=True, nodes=0)
            report["windows"].append(entry)
            continue
        pts = enumerate_box(lattice, -R, R, lo, hi)
        nodes = np.sort(np.array([float(p.x) for p in pts]))
        entry["nodes"] = len(nodes)
        if len(nodes) == 0:
            entry.update(condition=0.0, singular=False)
            report["windows"].append(entry)
            continue
        kernel = RKernel(Omega)
        G = _kernels.gram_matrix(nodes, kernel._w, kernel._us, kernel._vs)
        cond = condition_estimate(G)
        entry.update(condition=float(cond), singular=not np.isfinite(cond))
        report["windows"].append(entry)
    return report
