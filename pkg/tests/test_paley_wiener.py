"""Biorthogonal systems, smooth interpolants, seminorms, density probe."""

import math

import numpy as np
import pytest

from quasicomb.envelopes import Envelope, gauss_legendre_panels
from quasicomb.errors import EnvelopeTooWide, IllConditioned
from quasicomb.lattice import default_lattice
from quasicomb.paley_wiener import (
    RKernel,
    SeminormEstimate,
    gram_biorth,
    interpolate_schwartz,
    interpolation_probe,
    seminorm_estimate,
)
from quasicomb.regions import IntervalUnion

HALF = IntervalUnion.single(-0.5, 0.5)


def test_kernel_at_zero_is_measure():
    J = IntervalUnion([(-0.5, 0.5), (1, 1.25), (-1.25, -1)])
    k = RKernel(J)
    assert k.eval(np.array([0.0]))[0] == pytest.approx(J.measure(), abs=1e-14)


def test_kernel_bounded_by_measure():
    J = IntervalUnion([(-0.7, 0.7), (2, 2.5), (-2.5, -2)])
    k = RKernel(J)
    xs = np.linspace(-50, 50, 2001)
    assert np.max(np.abs(k.eval(xs))) <= J.measure() + 1e-12


def test_kernel_rejects_asymmetric():
    with pytest.raises(ValueError):
        RKernel(IntervalUnion([(0, 1)]))


def test_gram_integer_nodes_is_identity():
    sysm = gram_biorth(HALF, [0.0, 1.0])
    assert np.allclose(sysm.gram, np.eye(2), atol=1e-14)
    assert np.allclose(sysm.coeffs, np.eye(2), atol=1e-12)


def test_gram_half_shift_frozen_value():
    sysm = gram_biorth(HALF, [0.0, 0.5])
    want = np.array([[1, 2 / math.pi], [2 / math.pi, 1]])
    assert np.allclose(sysm.gram, want, atol=1e-13)


def test_near_duplicate_nodes_ill_conditioned():
    with pytest.raises(IllConditioned):
        gram_biorth(HALF, [0.0, 1e-9])


def test_biorthogonality_within_tolerance():
    nodes = np.array([-2.2, -1.0, 0.0, 0.7, 1.9, 3.1])
    sysm = gram_biorth(IntervalUnion.single(-0.6, 0.6), nodes)
    vals = sysm.eval(nodes)  # (n_nodes, n_nodes)
    assert np.max(np.abs(vals - np.eye(len(nodes)))) < 1e-8


def test_interpolant_zero_data_is_zero():
    nodes = [-1.5, 0.0, 2.0]
    f = interpolate_schwartz(HALF, 0.2, nodes, [0, 0, 0])
    xs = np.linspace(-10, 10, 101)
    assert np.allclose(f.eval(xs), 0.0, atol=1e-14)


def test_interpolant_indicator_data():
    nodes = np.array([-2.0, -0.8, 0.0, 1.1, 2.3])
    data = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
    f = interpolate_schwartz(IntervalUnion.single(-0.7, 0.7), 0.15, nodes, data)
    vals = f.eval(nodes)
    assert abs(vals[2] - 1.0) < 1e-8
    assert np.max(np.abs(vals[[0, 1, 3, 4]])) < 1e-8


def test_interpolant_random_decaying_data_and_linearity():
    rng = np.random.default_rng(42)
    nodes = np.sort(rng.uniform(-6, 6, 13))
    data = np.exp(-np.abs(nodes)) * rng.uniform(0.5, 1.5, 13)
    J = IntervalUnion.single(-0.8, 0.8)
    f = interpolate_schwartz(J, 0.2, nodes, data)
    assert f.node_residual < 1e-8
    g = interpolate_schwartz(J, 0.2, nodes, 2.0 * data)
    xs = rng.uniform(-20, 20, 50)
    assert np.allclose(g.eval(xs), 2.0 * f.eval(xs), rtol=1e-12, atol=1e-13)


def test_interpolant_even_data_gives_even_function():
    nodes = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * 1.3
    data = np.array([0.1, 0.5, 1.0, 0.5, 0.1])
    f = interpolate_schwartz(IntervalUnion.single(-0.6, 0.6), 0.25, nodes, data)
    xs = np.linspace(0, 15, 97)
    assert np.allclose(f.eval(xs), f.eval(-xs), atol=1e-12)


def test_envelope_too_wide_raises():
    ambient = IntervalUnion.single(-0.55, 0.55)
    with pytest.raises(EnvelopeTooWide):
        interpolate_schwartz(HALF, 0.2, [0.0, 1.0], [1.0, 0.0], ambient=ambient)


def test_hat_vanishes_outside_padded_support():
    f = interpolate_schwartz(HALF, 0.1, [-1.0, 0.0, 1.0], [0.2, 1.0, 0.2])
    ts = np.array([0.75, -0.61, 3.0, -12.0])  # dist to J exceeds eps
    assert np.all(f.eval_hat(ts) == 0.0)


def test_hat_matches_direct_fourier_oracle():
    # independent oracle: panelized quadrature of f(x) e^{-2 pi i t x}
    nodes = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    data = np.array([0.05, 0.4, 1.0, 0.4, 0.05])
    f = interpolate_schwartz(HALF, 0.25, nodes, data)
    X = 400.0
    qn, qw = gauss_legendre_panels(-X, X, int(4 * X))
    fx = f.eval(qn)
    ts = np.linspace(-0.74, 0.74, 9)
    direct = np.array([np.sum(qw * fx * np.exp(-2j * math.pi * t * qn)) for t in ts])
    got = f.eval_hat(ts)
    assert np.max(np.abs(got - direct)) < 1e-6


def test_hat_real_and_even_for_even_data():
    nodes = np.array([-1.5, 0.0, 1.5])
    data = np.array([0.3, 1.0, 0.3])
    f = interpolate_schwartz(HALF, 0.2, nodes, data)
    ts = np.array([0.1, 0.35, 0.6])
    plus = f.eval_hat(ts)
    minus = f.eval_hat(-ts)
    assert np.max(np.abs(plus.imag)) < 1e-10
    assert np.allclose(plus, minus, atol=1e-10)


def test_reproducing_property_recovers_coefficients():
    # g = sum a_mu K(. - mu): minimal-norm recovery from node samples
    nodes = np.array([-2.0, -0.5, 0.0, 1.0, 2.5])
    sysm = gram_biorth(IntervalUnion.single(-0.55, 0.55), nodes)
    rng = np.random.default_rng(9)
    a = rng.normal(size=len(nodes))
    samples = sysm.gram @ a
    recovered = sysm.coeffs @ samples
    assert np.allclose(recovered, a, atol=1e-8)


def test_parseval_cross_check():
    # int_J |g_hat|^2 equals a^T G a for g = sum a K(. - mu)
    J = IntervalUnion.single(-0.5, 0.5)
    nodes = np.array([-1.0, 0.0, 0.4, 1.7])
    sysm = gram_biorth(J, nodes)
    rng = np.random.default_rng(3)
    a = rng.normal(size=4)
    quadratic = float(a @ sysm.gram @ a)
    qn, qw = gauss_legendre_panels(-0.5, 0.5, 64)
    ghat = np.exp(-2j * math.pi * np.outer(qn, nodes)) @ a
    integral = float(np.sum(qw * np.abs(ghat) ** 2))
    assert integral == pytest.approx(quadratic, rel=1e-8)


# -- seminorms ----------------------------------------------------------------


class _ZeroFn:
    def eval(self, xs, order=0):
        return np.zeros_like(np.atleast_1d(xs))


def test_seminorm_zero_function():
    est = seminorm_estimate(_ZeroFn(), 2, 1, radius=5.0)
    assert est.value == 0.0


def test_seminorm_of_unit_kernel():
    est = seminorm_estimate(RKernel(HALF), 0, 0, radius=8.0, step=0.01)
    assert est.sup == pytest.approx(1.0, abs=1e-12)
    assert est.at == pytest.approx(0.0, abs=1e-9)


class _EnvelopeFn:
    def __init__(self, eps, s=1):
        self.env = Envelope(eps, s=s)
        self.table = self.env.build_table(600.0)

    def eval(self, xs, order=0):
        return np.atleast_1d(self.env.eval_table(xs, order, self.table))


def test_seminorm_envelope_stable_under_refinement():
    fn = _EnvelopeFn(0.25)
    a = seminorm_estimate(fn, 2, 1, radius=40.0, step=0.02)
    b = seminorm_estimate(fn, 2, 1, radius=40.0, step=0.01)
    assert a.value > 0
    assert abs(a.value - b.value) < 0.01 * b.value


# -- density probe ------------------------------------------------------------


def test_probe_zero_measure_flags_singular():
    lat = default_lattice()
    report = interpolation_probe(lat, (-0.75, 0.75), IntervalUnion.empty(), [4, 8])
    assert all(w["singular"] for w in report["windows"])


def test_probe_above_threshold_bounded_below_blows_up():
    # windows small enough that the sub-threshold blow-up stays inside
    # float range (it saturates near 1e16 beyond window ~12)
    lat = default_lattice()
    interval = (-0.75, 0.75)
    det = lat.det_abs_float()
    threshold = 1.5 / det  # |interval| / det
    good = IntervalUnion.single(-0.75 * threshold, 0.75 * threshold)
    bad = IntervalUnion.single(-0.25 * threshold, 0.25 * threshold)
    windows = [2, 4, 8]
    rep_good = interpolation_probe(lat, interval, good, windows)
    rep_bad = interpolation_probe(lat, interval, bad, windows)
    conds_good = [w["condition"] for w in rep_good["windows"]]
    conds_bad = [w["condition"] for w in rep_bad["windows"]]
    for a, b in zip(conds_good, conds_good[1:]):
        assert b < 10 * a
    for a, b in zip(conds_bad, conds_bad[1:]):
        assert not np.isfinite(b) or b >= 10 * a
