"""Numeric kernel backends: closed forms vs quadrature oracles, and
numba/numpy path equivalence."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from quasicomb import _kernels as K
from quasicomb.envelopes import Envelope


def kernel_quad_oracle(x, w, us, vs, order):
    """Direct quadrature of 2 sum_parts int t^k cos(2 pi x t + k pi/2) (2 pi t)^k."""
    parts = ([(0.0, w)] if w > 0 else []) + list(zip(us, vs))
    total = 0.0
    for u, v in parts:
        val, _ = quad(
            lambda t: (2 * math.pi * t) ** order
            * math.cos(2 * math.pi * x * t + order * math.pi / 2),
            u,
            v,
            limit=400,
        )
        total += 2 * val
    return total


CASES = [
    # (w, us, vs)
    (0.5, [], []),
    (0.0, [1.0], [1.5]),
    (0.3, [0.8, 2.0], [1.1, 2.4]),
]


@pytest.mark.parametrize("w,us,vs", CASES)
@pytest.mark.parametrize("order", [0, 1, 2, 3, 5])
def test_kernel_matches_quadrature(w, us, vs, order):
    xs = np.array([0.0, 1e-6, 0.02, 0.3, 0.5, 1.0, 2.5, 10.0, -3.3, 40.7])
    got = K.kernel_batch(xs, w, us, vs, order)
    # the oracle's own noise floor scales with the integrand magnitude
    scale = (2 * math.pi * max([w] + list(vs))) ** order
    for x, g in zip(xs, got):
        want = kernel_quad_oracle(x, w, np.array(us), np.array(vs), order)
        assert g == pytest.approx(want, abs=1e-11 * (1 + scale), rel=1e-9)


def test_kernel_sinc_values():
    # J = [-1/2, 1/2]: K(x) = sin(pi x)/(pi x)
    xs = np.array([0.0, 1.0, 0.5])
    got = K.kernel_batch(xs, 0.5, [], [])
    assert got[0] == pytest.approx(1.0, abs=1e-14)  # mes(J)
    assert got[1] == pytest.approx(0.0, abs=1e-14)  # sinc zero at 1
    assert got[2] == pytest.approx(2 / math.pi, abs=1e-13)


def test_kernel_even_and_bounded():
    xs = np.linspace(-30, 30, 501)
    vals = K.kernel_batch(xs, 0.4, [0.9], [1.3], 0)
    assert np.allclose(vals, vals[::-1], atol=1e-12)
    assert np.all(np.abs(vals) <= 2 * (0.4 + 0.4) + 1e-12)  # |K| <= mes(J)


def test_taylor_recurrence_seam_consistent():
    # both branches must match the oracle right at the |a| v = 6 switch
    w = 1.2
    seam = 6.0 / (2 * math.pi * w)
    xs = np.array([seam - 1e-4, seam - 1e-9, seam + 1e-9, seam + 1e-4])
    vals = K.kernel_batch(xs, w, [], [], 3)
    for x, g in zip(xs, vals):
        want = kernel_quad_oracle(x, w, np.array([]), np.array([]), 3)
        assert g == pytest.approx(want, rel=1e-10, abs=1e-8)


def test_gram_matches_kernel():
    nodes = np.array([-2.0, -0.3, 0.0, 0.9, 2.7])
    G = K.gram_matrix(nodes, 0.5, [], [])
    for i, a in enumerate(nodes):
        for j, b in enumerate(nodes):
            assert G[i, j] == pytest.approx(
                K.kernel_batch(np.array([a - b]), 0.5, [], [])[0], abs=1e-14
            )
    assert np.allclose(G, G.T)


def test_numpy_and_numba_paths_agree():
    rng = np.random.default_rng(0)
    xs = rng.uniform(-50, 50, 200)
    w, us, vs = 0.35, np.array([1.0, 2.2]), np.array([1.4, 2.9])
    for order in (0, 1, 2, 4):
        ref = K._kernel_batch_np(xs, w, us, vs, order)
        got = K.kernel_batch(xs, w, us, vs, order)
        assert np.allclose(got, ref, rtol=1e-12, atol=1e-12)
    nodes = rng.uniform(-10, 10, 40)
    assert np.allclose(K.gram_matrix(nodes, w, us, vs), K._gram_np(nodes, w, us, vs), atol=1e-12)


def test_windowed_eval_backends_agree():
    rng = np.random.default_rng(1)
    env = Envelope(0.15, s=2)
    table = env.build_table(300.0)
    nodes = np.sort(rng.uniform(-40, 40, 25))
    coeffs = rng.normal(size=25)
    xs = rng.uniform(-60, 60, 100)
    for order in (0, 1, 3):
        got = K.windowed_eval(xs, nodes, coeffs, 0.5, [], [], table, order)
        ref = K._windowed_eval_np(xs, nodes, coeffs, 0.5, np.array([]), np.array([]), table.values, table.step, order)
        assert np.allclose(got, ref, rtol=1e-10, atol=1e-12)


def test_windowed_eval_matches_direct_product():
    # f(x) = sum b_mu K(x-mu) Phi(x-mu) against explicit composition
    env = Envelope(0.2, s=2)
    table = env.build_table(200.0)
    nodes = np.array([-3.0, 0.0, 1.7])
    coeffs = np.array([0.4, -1.1, 0.25])
    xs = np.array([-5.0, -0.2, 0.0, 0.61, 4.4, 30.0])
    got = K.windowed_eval(xs, nodes, coeffs, 0.5, [], [], table, 0)
    want = np.zeros_like(xs)
    for b, mu in zip(coeffs, nodes):
        kv = K.kernel_batch(xs - mu, 0.5, [], [])
        ev = env.eval_table(xs - mu, 0, table)
        want += b * kv * ev
    assert np.allclose(got, want, atol=1e-12)
    # first derivative by central differences
    h = 1e-5
    d_got = K.windowed_eval(xs, nodes, coeffs, 0.5, [], [], table, 1)
    plus = K.windowed_eval(xs + h, nodes, coeffs, 0.5, [], [], table, 0)
    minus = K.windowed_eval(xs - h, nodes, coeffs, 0.5, [], [], table, 0)
    assert np.allclose(d_got, (plus - minus) / (2 * h), atol=1e-5, rtol=1e-4)


def test_cosine_sum_backends_agree():
    rng = np.random.default_rng(3)
    ts = rng.uniform(-1, 1, 50)
    nodes = rng.uniform(-100, 100, 30)
    coeffs = rng.normal(size=30)
    got = K.cosine_sum(ts, nodes, coeffs)
    ref = K._cos_sum_np(ts, nodes, coeffs)
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-12)


# -- envelope ---------------------------------------------------------------


def test_envelope_unit_normalization():
    for s in (1, 2):
        env = Envelope(0.25, s=s)
        assert env.eval_quadrature(0.0) == pytest.approx(1.0, abs=1e-12)
        val, _ = quad(lambda t: env.bump(t), -0.25, 0.25, limit=200)
        assert val == pytest.approx(1.0, abs=1e-10)


def test_envelope_quadrature_vs_table():
    env = Envelope(0.2, s=2)
    table = env.build_table(120.0)
    xs = np.array([0.0, 0.3, 1.7, 5.0, 20.0, 57.3])
    for order in (0, 1, 2, 3):
        a = env.eval_quadrature(xs, order)
        b = env.eval_table(xs, order, table)
        assert np.allclose(a, b, atol=1e-9, rtol=1e-7)


def test_envelope_even_real():
    env = Envelope(0.3, s=1)
    table = env.build_table(60.0)
    xs = np.linspace(-40, 40, 201)
    vals = env.eval_table(xs, 0, table)
    assert np.allclose(vals, vals[::-1], atol=1e-12)


def test_envelope_decay_weighted_by_power_five():
    env = Envelope(0.2, s=2)
    profile = env.decay_profile([10, 20, 40, 80, 160], weight_power=5)
    sups = [v for _, v in profile]
    assert all(a >= b for a, b in zip(sups, sups[1:]))
    assert sups[-1] < sups[0] * 1e-3


def test_envelope_cdf_ramp():
    env = Envelope(0.1, s=1)
    assert env.bump_cdf(-0.2) == 0.0
    assert env.bump_cdf(0.2) == 1.0
    assert env.bump_cdf(0.0) == pytest.approx(0.5, abs=1e-12)
    mid = env.bump_cdf(0.03)
    want, _ = quad(lambda t: env.bump(t), -0.1, 0.03, limit=200)
    assert mid == pytest.approx(want, abs=1e-11)


def test_backend_name_reported():
    assert K.backend() in ("numba", "numpy")
