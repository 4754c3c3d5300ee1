"""Staged construction: seed placement, region choice, stage conditions."""

import json
from fractions import Fraction

import numpy as np
import pytest

from quasicomb.construction import (
    BuildConfig,
    BuildState,
    StageFunction,
    build_seed,
    choose_spectrum_region,
    run_stages,
    stage_node_set,
)
from quasicomb.errors import IllConditioned, ScheduleExhausted
from quasicomb.field import AlgebraicReal
from quasicomb.lattice import default_lattice
from quasicomb.regions import SetKind, Staircase, generate_points

QUICK = BuildConfig(
    stages=1,
    trunc_factor=3e-2,
    node_window_cap=512.0,
    fine_radius=32.0,
    fine_step=0.05,
)


def test_zero_stages_is_normalized_seed():
    state = run_stages(QUICK, stages=0)
    assert state.stage == 0
    val = state.function.eval(np.array([0.0]))[0]
    assert abs(val - 1.0) < 1e-12


def test_seed_lobes_sit_in_forbidden_gaps():
    lat = default_lattice()
    stair = Staircase.default()
    seed = build_seed(lat, stair, BuildConfig())
    q = generate_points(SetKind.FREQ_FORBIDDEN, lat, stair, 4)
    for lobe in seed.lobes:
        lo, hi = lobe.center - lobe.half_width, lobe.center + lobe.half_width
        for v in q.values:
            fv = float(v)
            assert fv <= lo - 1e-12 or fv >= hi + 1e-12
    # lobe centers are exact lattice heights
    for lobe in seed.lobes:
        hits = [
            v for v in q.values  # q holds forbidden points, lobes avoid them
        ]
    bands = [spec[0] for spec in BuildConfig().lobe_specs]
    for lobe, band in zip(seed.lobes, bands):
        assert band < lobe.center < band + 1


def test_seed_hat_vanishes_on_forbidden_points():
    lat = default_lattice()
    stair = Staircase.default()
    seed = build_seed(lat, stair, BuildConfig())
    q = generate_points(SetKind.FREQ_FORBIDDEN, lat, stair, 4)
    vals = seed.eval_hat(np.array([float(v) for v in q.values]))
    assert np.all(vals == 0.0)


def test_seed_even_and_normalized():
    lat = default_lattice()
    seed = build_seed(lat, Staircase.default(), BuildConfig())
    xs = np.linspace(0, 30, 173)
    assert np.allclose(seed.eval(xs), seed.eval(-xs), atol=1e-12)
    assert abs(seed.eval(np.array([0.0]))[0] - 1.0) < 1e-12


def test_region_choice_degenerate_stage_keeps_previous():
    lat = default_lattice()
    stair = Staircase.default()
    config = BuildConfig()
    seed = build_seed(lat, stair, config)
    region0, margin0 = choose_spectrum_region(0, lat, stair, config, None, seed.support())
    assert margin0 > 0
    again, _ = choose_spectrum_region(0, lat, stair, config, region0, seed.support())
    assert again == region0


def test_region_choice_meets_measure_and_symmetry():
    lat = default_lattice()
    stair = Staircase.default()
    config = BuildConfig()
    seed = build_seed(lat, stair, config)
    prev, _ = choose_spectrum_region(0, lat, stair, config, None, seed.support())
    det = abs(float(lat.det))
    for n in (1, 2, 3):
        region, margin = choose_spectrum_region(n, lat, stair, config, prev, seed.support())
        need = 2.0 * float(config.dual_cut(n)) * det
        assert region.measure() > need
        assert region.is_symmetric()
        assert margin > 0
        assert region.contains_union(prev)
        prev = region


def test_condition_cap_one_fails_first_stage():
    config = BuildConfig(stages=1, condition_cap=1.0, node_window_cap=512.0, trunc_factor=3e-2)
    with pytest.raises(IllConditioned):
        run_stages(config, stages=1)


def test_unreachable_schedule_exhausts():
    # a schedule starting beyond the node window leaves no candidates
    config = BuildConfig(
        stages=1, h_schedule_base=1e6, node_window_cap=512.0, trunc_factor=3e-2
    )
    with pytest.raises(ScheduleExhausted):
        run_stages(config, stages=1)


def test_node_set_contains_origin_and_increasing_cuts(built_state):
    lat = built_state.lattice.dual()
    nodes = stage_node_set(lat, Fraction(1, 10), 50.0, built_state.staircase)
    assert any(v.is_zero() for v in nodes.values)
    floats = nodes.floats()
    assert floats == sorted(floats)


# -- full-state checks (session fixture) ------------------------------------


def test_three_stage_reports_pass(built_state):
    assert built_state.stage == 3
    for r in built_state.reports:
        assert r.passed(built_state.config)
        assert abs(r.value_at_zero - 1.0) <= 1e-8
        bound = 2.0 ** (-r.stage)
        assert max(r.seminorms.values()) < bound
        assert r.vanish_max <= built_state.config.vanish_tol
        assert r.node_residual <= built_state.config.node_residual_tol


def test_region_nesting_and_height_monotonicity(built_state):
    regions = built_state.regions
    for a, b in zip(regions, regions[1:]):
        assert b.contains_union(a)
    heights = built_state.heights
    assert all(a < b for a, b in zip(heights, heights[1:]))


def test_telescoping_sum(built_state):
    fn = built_state.function
    rng = np.random.default_rng(1)
    xs = rng.uniform(-80, 80, 100)
    total = fn.seed.eval(xs)
    for term in fn.corrections:
        total = total - term.eval(xs)
    assert np.max(np.abs(fn.eval(xs) - total)) < 1e-10


def test_even_and_real_at_samples(built_state):
    fn = built_state.function
    xs = np.linspace(0, 120, 241)
    plus = fn.eval(xs)
    minus = fn.eval(-xs)
    assert np.issubdtype(plus.dtype, np.floating)
    assert np.max(np.abs(plus - minus)) < 1e-12


def test_vanishing_inherited_inside_cut(built_state):
    # stage-3 forbidden points inside the stage-3 cut already vanished at
    # stage 2; the stage-3 correction is pinned to zero there, so the two
    # functions agree at those points up to the solve residual
    state = built_state
    dual = state.lattice.dual()
    dual_stair = state.dual_staircase()
    window = min(r.node_window for r in state.reports)
    z3 = generate_points(SetKind.STAGE_VANISH, dual, dual_stair, Fraction(int(window)), stage=3)
    h3 = AlgebraicReal(state.heights[2])
    inner = np.array([float(v) for v in z3.values if abs(v) <= h3])
    if len(inner):
        f3 = state.function.corrections[2]
        assert np.max(np.abs(f3.eval(inner))) < 1e-8


def test_stage_vanish_generation_matches_internal_filter(built_state):
    # the public generator and the in-stage node filter must agree
    state = built_state
    dual = state.lattice.dual()
    dual_stair = state.dual_staircase()
    z2 = generate_points(SetKind.STAGE_VANISH, dual, dual_stair, 60, stage=2)
    nodes = stage_node_set(dual, state.config.dual_cut(2), 60.0, state.staircase)
    cuts = [
        (AlgebraicReal(state.config.dual_cut(k)), AlgebraicReal(state.heights[k - 1]))
        for k in (1, 2)
    ]
    filtered = {
        v.coeffs
        for p, v in zip(nodes.points, nodes.values)
        if any(abs(p.x) < xc and abs(p.y) > yc for xc, yc in cuts)
    }
    assert filtered == {v.coeffs for v in z2.values}


def test_function_vanishes_on_regenerated_stage_set(built_state):
    state = built_state
    dual = state.lattice.dual()
    z3 = generate_points(
        SetKind.STAGE_VANISH, dual, state.dual_staircase(), 500, stage=3
    )
    vals = state.function.eval(np.array(z3.floats()))
    assert np.max(np.abs(vals)) <= state.config.vanish_tol


def test_state_round_trip(built_state):
    data = json.loads(json.dumps(built_state.to_json()))
    again = BuildState.from_json(data)
    xs = np.linspace(-60, 60, 201)
    assert np.max(np.abs(again.function.eval(xs) - built_state.function.eval(xs))) < 1e-12
    assert [float(h) for h in again.heights] == [float(h) for h in built_state.heights]
    assert len(again.reports) == len(built_state.reports)


def test_hat_support_structural(built_state):
    fn = built_state.function
    support = fn.support_hat()
    outside = np.array([5.0, -7.3, 11.1, 3.3])
    for t in outside:
        assert not support.contains(t)
    assert np.all(fn.eval_hat(outside) == 0.0)
