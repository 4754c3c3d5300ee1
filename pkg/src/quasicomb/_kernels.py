"""Hot numeric kernels: reproducing-kernel evaluation, Gram assembly, and
windowed-interpolant evaluation on dense grids.

Everything here exists twice: a numba @njit implementation and a pure-numpy
fallback with identical semantics.  The fallback is selected automatically
when numba is unavailable, or explicitly by setting the environment variable
QUASICOMB_NO_NUMBA=1 before import.  `benchmarks/bench_kernels.py` compares
the two paths.

The reproducing kernel of a symmetric interval union
J = [-w, w] + sum of mirrored pairs [u_i, v_i], [-v_i, -u_i] is

    K^(k)(x) = 2 (2 pi)^k sum_parts int t^k cos(2 pi x t + k pi/2) dt,

computed per part by the integration-by-parts recurrence for
int t^k cos(at) dt, with a Taylor series in a = 2 pi x below |a| v <= 6
where the recurrence would divide by a small a.
"""

from __future__ import annotations

import math
import os

import numpy as np

HAS_NUMBA = False
if not os.environ.get("QUASICOMB_NO_NUMBA"):
    try:
        import numba
        from numba import njit, prange

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAS_NUMBA = False

_TAYLOR_CUT = 6.0
_TAYLOR_TERMS = 36
_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# scalar part integrals (python/numba shared source)
# ---------------------------------------------------------------------------


def _part_cs_py(a, u, v, kmax, C, S):
    """Fill C[j] = int_u^v t^j cos(at) dt and S[j] likewise with sin, j <= kmax."""
    if abs(a) * max(abs(u), abs(v)) <= _TAYLOR_CUT:
        for k in range(kmax + 1):
            ck = 0.0
            sk = 0.0
            # Taylor in a: cos(at) = sum (-1)^j (at)^{2j}/(2j)!
            pow_a = 1.0
            fact = 1.0
            for j in range(_TAYLOR_TERMS):
                # cos part: exponent k+2j+1
                term_c = pow_a * (v ** (k + 2 * j + 1) - u ** (k + 2 * j + 1)) / (
                    (k + 2 * j + 1) * fact
                )
                # sin part: a^{2j+1}, exponent k+2j+2
                term_s = (
                    pow_a
                    * a
                    * (v ** (k + 2 * j + 2) - u ** (k + 2 * j + 2))
                    / ((k + 2 * j + 2) * fact * (2 * j + 1))
                )
                if j % 2 == 0:
                    ck += term_c
                    sk += term_s
                else:
                    ck -= term_c
                    sk -= term_s
                pow_a *= a * a
                fact *= (2 * j + 1) * (2 * j + 2)
            C[k] = ck
            S[k] = sk
        return
    sin_u = math.sin(a * u)
    sin_v = math.sin(a * v)
    cos_u = math.cos(a * u)
    cos_v = math.cos(a * v)
    C[0] = (sin_v - sin_u) / a
    S[0] = (cos_u - cos_v) / a
    pu = 1.0
    pv = 1.0
    for k in range(1, kmax + 1):
        pu *= u
        pv *= v
        C[k] = (pv * sin_v - pu * sin_u) / a - (k / a) * S[k - 1]
        S[k] = (pu * cos_u - pv * cos_v) / a + (k / a) * C[k - 1]


def _hermite_py(t, values, order, step, n):
    """Cubic Hermite lookup on the envelope table at t >= 0."""
    if t >= (n - 1) * step:
        return 0.0
    idx = int(t / step)
    if idx > n - 2:
        idx = n - 2
    theta = t / step - idx
    p0 = values[order, idx]
    p1 = values[order, idx + 1]
    m0 = values[order + 1, idx] * step
    m1 = values[order + 1, idx + 1] * step
    t2 = theta * theta
    t3 = t2 * theta
    return (
        (2 * t3 - 3 * t2 + 1) * p0
        + (t3 - 2 * t2 + theta) * m0
        + (-2 * t3 + 3 * t2) * p1
        + (t3 - t2) * m1
    )


def _binom_row(k):
    row = np.ones(k + 1)
    for j in range(1, k + 1):
        row[j] = row[j - 1] * (k - j + 1) / j
    return row


# ---------------------------------------------------------------------------
# batch drivers, pure python/numpy versions
# ---------------------------------------------------------------------------


# -- vectorized numpy fallback (same math, array masks instead of branches) --


def _part_cs_np(a, u, v, kmax):
    """C, S arrays of shape (kmax+1, len(a)) for scalar interval [u, v]."""
    a = np.asarray(a, dtype=float)
    C = np.zeros((kmax + 1, a.shape[0]))
    S = np.zeros((kmax + 1, a.shape[0]))
    small = np.abs(a) * max(abs(u), abs(v)) <= _TAYLOR_CUT
    if small.any():
        asm = a[small]
        pow_a = np.ones_like(asm)
        fact = 1.0
        Cs = np.zeros((kmax + 1, asm.shape[0]))
        Ss = np.zeros((kmax + 1, asm.shape[0]))
        for j in range(_TAYLOR_TERMS):
            sign = -1.0 if j % 2 else 1.0
            for k in range(kmax + 1):
                Cs[k] += sign * pow_a * (v ** (k + 2 * j + 1) - u ** (k + 2 * j + 1)) / (
                    (k + 2 * j + 1) * fact
                )
                Ss[k] += (
                    sign
                    * pow_a
                    * asm
                    * (v ** (k + 2 * j + 2) - u ** (k + 2 * j + 2))
                    / ((k + 2 * j + 2) * fact * (2 * j + 1))
                )
            pow_a = pow_a * asm * asm
            fact *= (2 * j + 1) * (2 * j + 2)
        C[:, small] = Cs
        S[:, small] = Ss
    big = ~small
    if big.any():
        ab = a[big]
        sin_u, sin_v = np.sin(ab * u), np.sin(ab * v)
        cos_u, cos_v = np.cos(ab * u), np.cos(ab * v)
        Cb = np.zeros((kmax + 1, ab.shape[0]))
        Sb = np.zeros((kmax + 1, ab.shape[0]))
        Cb[0] = (sin_v - sin_u) / ab
        Sb[0] = (cos_u - cos_v) / ab
        pu, pv = 1.0, 1.0
        for k in range(1, kmax + 1):
            pu *= u
            pv *= v
            Cb[k] = (pv * sin_v - pu * sin_u) / ab - (k / ab) * Sb[k - 1]
            Sb[k] = (pu * cos_u - pv * cos_v) / ab + (k / ab) * Cb[k - 1]
        C[:, big] = Cb
        S[:, big] = Sb
    return C, S


_ROT = ((1, 0), (-1, 1), (-1, 0), (1, 1))  # (sign, use_sin) per k mod 4


def _kernel_orders_np(xs, w, us, vs, kmax):
    """K^(j)(xs) for all j <= kmax, shape (kmax+1, len(xs))."""
    xs = np.asarray(xs, dtype=float)
    a = _TWO_PI * xs
    total = np.zeros((kmax + 1, xs.shape[0]))
    parts = []
    if w > 0.0:
        parts.append((0.0, float(w)))
    parts.extend((float(u), float(v)) for u, v in zip(us, vs))
    for u, v in parts:
        C, S = _part_cs_np(a, u, v, kmax)
        for j in range(kmax + 1):
            sign, use_sin = _ROT[j % 4]
            total[j] += sign * (S[j] if use_sin else C[j])
    scale = 2.0 * _TWO_PI ** np.arange(kmax + 1)
    return total * scale[:, None]


def _kernel_batch_np(xs, w, us, vs, order):
    return _kernel_orders_np(xs, w, us, vs, order)[order]


def _gram_np(nodes, w, us, vs):
    diff = nodes[:, None] - nodes[None, :]
    flat = _kernel_batch_np(diff.ravel(), w, us, vs, 0)
    G = flat.reshape(diff.shape)
    return 0.5 * (G + G.T)


def _env_eval_np(d, env_values, env_step, order):
    """Phi^(order)(d) table lookup, sign-corrected for odd orders."""
    t = np.abs(d)
    n = env_values.shape[1]
    idx = np.minimum((t / env_step).astype(np.int64), n - 2)
    theta = t / env_step - idx
    p0 = env_values[order, idx]
    p1 = env_values[order, idx + 1]
    m0 = env_values[order + 1, idx] * env_step
    m1 = env_values[order + 1, idx + 1] * env_step
    t2 = theta * theta
    t3 = t2 * theta
    out = (
        (2 * t3 - 3 * t2 + 1) * p0
        + (t3 - 2 * t2 + theta) * m0
        + (-2 * t3 + 3 * t2) * p1
        + (t3 - t2) * m1
    )
    out = np.where(t >= (n - 1) * env_step, 0.0, out)
    if order % 2 == 1:
        out = np.where(d < 0, -out, out)
    return out


def _windowed_eval_np(xs, nodes, coeffs, w, us, vs, env_values, env_step, order):
    xs = np.asarray(xs, dtype=float)
    out = np.zeros(xs.shape[0])
    binom = _binom_row(order)
    for q in range(nodes.shape[0]):
        d = xs - nodes[q]
        kvals = _kernel_orders_np(d, w, us, vs, order)
        term = np.zeros_like(d)
        for j in range(order + 1):
            term += binom[j] * kvals[j] * _env_eval_np(d, env_values, env_step, order - j)
        out += coeffs[q] * term
    return out


def _windowed_eval_all_np(xs, nodes, coeffs, w, us, vs, env_values, env_step, kmax):
    xs = np.asarray(xs, dtype=float)
    out = np.zeros((kmax + 1, xs.shape[0]))
    binom = np.array([[_binom_row(k)[j] if j <= k else 0.0 for j in range(kmax + 1)] for k in range(kmax + 1)])
    for q in range(nodes.shape[0]):
        d = xs - nodes[q]
        kvals = _kernel_orders_np(d, w, us, vs, kmax)
        evals = np.stack([_env_eval_np(d, env_values, env_step, e) for e in range(kmax + 1)])
        for k in range(kmax + 1):
            term = np.zeros_like(d)
            for j in range(k + 1):
                term += binom[k, j] * kvals[j] * evals[k - j]
            out[k] += coeffs[q] * term
    return out


def _cos_sum_np(ts, nodes, coeffs):
    ts = np.asarray(ts, dtype=float)
    return np.cos(_TWO_PI * np.outer(ts, nodes)) @ coeffs


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

if HAS_NUMBA:
    _part_cs_nb = njit(cache=True)(_part_cs_py)
    _hermite_nb = njit(cache=True)(_hermite_py)

    @njit(cache=True)
    def _kernel_value_nb(x, w, us, vs, kmax, C, S, out):
        for j in range(kmax + 1):
            out[j] = 0.0
        if w > 0.0:
            _part_cs_nb(_TWO_PI * x, 0.0, w, kmax, C, S)
            for j in range(kmax + 1):
                r = j % 4
                if r == 0:
                    out[j] += C[j]
                elif r == 1:
                    out[j] -= S[j]
                elif r == 2:
                    out[j] -= C[j]
                else:
                    out[j] += S[j]
        for i in range(us.shape[0]):
            _part_cs_nb(_TWO_PI * x, us[i], vs[i], kmax, C, S)
            for j in range(kmax + 1):
                r = j % 4
                if r == 0:
                    out[j] += C[j]
                elif r == 1:
                    out[j] -= S[j]
                elif r == 2:
                    out[j] -= C[j]
                else:
                    out[j] += S[j]
        scale = 2.0
        for j in range(kmax + 1):
            out[j] *= scale
            scale *= _TWO_PI

    @njit(cache=True, parallel=True)
    def _kernel_batch_nb(xs, w, us, vs, order):
        out = np.empty(xs.shape[0])
        for i in prange(xs.shape[0]):
            C = np.empty(order + 1)
            S = np.empty(order + 1)
            vals = np.empty(order + 1)
            _kernel_value_nb(xs[i], w, us, vs, order, C, S, vals)
            out[i] = vals[order]
        return out

    @njit(cache=True, parallel=True)
    def _gram_nb(nodes, w, us, vs):
        n = nodes.shape[0]
        G = np.empty((n, n))
        for i in prange(n):
            C = np.empty(1)
            S = np.empty(1)
            vals = np.empty(1)
            for j in range(i, n):
                _kernel_value_nb(nodes[i] - nodes[j], w, us, vs, 0, C, S, vals)
                G[i, j] = vals[0]
                G[j, i] = vals[0]
        return G

    @njit(cache=True, parallel=True)
    def _windowed_eval_nb(xs, nodes, coeffs, w, us, vs, env_values, env_step, order):
        m = xs.shape[0]
        out = np.zeros(m)
        n_env = env_values.shape[1]
        binom = np.ones(order + 1)
        for j in range(1, order + 1):
            binom[j] = binom[j - 1] * (order - j + 1) / j
        for i in prange(m):
            C = np.empty(order + 1)
            S = np.empty(order + 1)
            kvals = np.empty(order + 1)
            acc = 0.0
            for q in range(nodes.shape[0]):
                d = xs[i] - nodes[q]
                _kernel_value_nb(d, w, us, vs, order, C, S, kvals)
                t = abs(d)
                term = 0.0
                for j in range(order + 1):
                    ek = order - j
                    ev = _hermite_nb(t, env_values, ek, env_step, n_env)
                    if d < 0.0 and ek % 2 == 1:
                        ev = -ev
                    term += binom[j] * kvals[j] * ev
                acc += coeffs[q] * term
            out[i] = acc
        return out

    @njit(cache=True, parallel=True)
    def _windowed_eval_all_nb(xs, nodes, coeffs, w, us, vs, env_values, env_step, kmax):
        m = xs.shape[0]
        out = np.zeros((kmax + 1, m))
        n_env = env_values.shape[1]
        binom = np.ones((kmax + 1, kmax + 1))
        for k in range(kmax + 1):
            for j in range(1, k + 1):
                binom[k, j] = binom[k, j - 1] * (k - j + 1) / j
        for i in prange(m):
            C = np.empty(kmax + 1)
            S = np.empty(kmax + 1)
            kvals = np.empty(kmax + 1)
            evals = np.empty(kmax + 1)
            acc = np.zeros(kmax + 1)
            for q in range(nodes.shape[0]):
                d = xs[i] - nodes[q]
                _kernel_value_nb(d, w, us, vs, kmax, C, S, kvals)
                t = abs(d)
                for e in range(kmax + 1):
                    ev = _hermite_nb(t, env_values, e, env_step, n_env)
                    if d < 0.0 and e % 2 == 1:
                        ev = -ev
                    evals[e] = ev
                b = coeffs[q]
                for k in range(kmax + 1):
                    term = 0.0
                    for j in range(k + 1):
                        term += binom[k, j] * kvals[j] * evals[k - j]
                    acc[k] += b * term
            for k in range(kmax + 1):
                out[k, i] = acc[k]
        return out

    @njit(cache=True, parallel=True)
    def _cos_sum_nb(ts, nodes, coeffs):
        out = np.zeros(ts.shape[0])
        for i in prange(ts.shape[0]):
            acc = 0.0
            for q in range(nodes.shape[0]):
                acc += coeffs[q] * math.cos(_TWO_PI * nodes[q] * ts[i])
            out[i] = acc
        return out


def backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"


def _as_arrays(xs, w, us, vs):
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(xs, dtype=float)))
    us = np.ascontiguousarray(np.asarray(us, dtype=float))
    vs = np.ascontiguousarray(np.asarray(vs, dtype=float))
    return xs, float(w), us, vs


def kernel_batch(xs, w, us, vs, order=0):
    """K_J^(order)(xs) for J = [-w, w] + mirrored pairs [u_i, v_i]."""
    xs, w, us, vs = _as_arrays(xs, w, us, vs)
    if HAS_NUMBA:
        return _kernel_batch_nb(xs, w, us, vs, int(order))
    return _kernel_batch_np(xs, w, us, vs, int(order))


def gram_matrix(nodes, w, us, vs):
    """Symmetric Gram K_J(node_i - node_j)."""
    nodes, w, us, vs = _as_arrays(nodes, w, us, vs)
    if HAS_NUMBA:
        return _gram_nb(nodes, w, us, vs)
    return _gram_np(nodes, w, us, vs)


def windowed_eval(xs, nodes, coeffs, w, us, vs, env_table, order=0):
    """f^(order)(xs) for f(x) = sum_mu coeffs_mu K_J(x-mu) Phi(x-mu)."""
    xs, w, us, vs = _as_arrays(xs, w, us, vs)
    nodes = np.ascontiguousarray(np.asarray(nodes, dtype=float))
    coeffs = np.ascontiguousarray(np.asarray(coeffs, dtype=float))
    values = np.ascontiguousarray(env_table.values)
    if HAS_NUMBA:
        return _windowed_eval_nb(xs, nodes, coeffs, w, us, vs, values, env_table.step, int(order))
    return _windowed_eval_np(xs, nodes, coeffs, w, us, vs, values, env_table.step, int(order))


def windowed_eval_all(xs, nodes, coeffs, w, us, vs, env_table, max_order):
    """All derivative orders 0..max_order of the windowed-kernel sum at once."""
    xs, w, us, vs = _as_arrays(xs, w, us, vs)
    nodes = np.ascontiguousarray(np.asarray(nodes, dtype=float))
    coeffs = np.ascontiguousarray(np.asarray(coeffs, dtype=float))
    values = np.ascontiguousarray(env_table.values)
    if HAS_NUMBA:
        return _windowed_eval_all_nb(
            xs, nodes, coeffs, w, us, vs, values, env_table.step, int(max_order)
        )
    return _windowed_eval_all_np(
        xs, nodes, coeffs, w, us, vs, values, env_table.step, int(max_order)
    )


def cosine_sum(ts, nodes, coeffs):
    """sum_mu coeffs_mu cos(2 pi mu t)."""
    ts = np.ascontiguousarray(np.atleast_1d(np.asarray(ts, dtype=float)))
    nodes = np.ascontiguousarray(np.asarray(nodes, dtype=float))
    coeffs = np.ascontiguousarray(np.asarray(coeffs, dtype=float))
    if HAS_NUMBA:
        return _cos_sum_nb(ts, nodes, coeffs)
    return _cos_sum_np(ts, nodes, coeffs)
