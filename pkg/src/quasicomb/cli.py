"""Batch front door: run constructions, generate sets, build and verify
measures, run probes, and emit JSON/CSV reports and plot data.

Exit codes: 0 all requested checks passed, 1 a verification failed,
2 configuration or schema error.  Every report embeds the configuration
hash and the package version; reruns with identical configuration and seed
produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .construction import BuildConfig, BuildState, run_stages, _config_from_json, _config_json
from .errors import ConfigError, QuasicombError
from .field import AlgebraicReal
from .lattice import Lattice2D, default_lattice
from .measures import (
    GaussianTest,
    dual_comb,
    lattice_comb,
    model_set_split,
    poisson_check,
    support_check,
    tb_norm,
)
from .paley_wiener import interpolation_probe
from .progressions import (
    Progression,
    ap_count,
    ap_cover_probe,
    ap_saturation,
    ap_triples,
    sample_progressions,
)
from .regions import IntervalUnion, SetKind, Staircase, generate_points, staircase_polyline
from .report import canonical_json, wrap_report, write_csv

_SCHEMA = json.loads((Path(__file__).parent / "schema.json").read_text())

_DEFAULT_WINDOWS = {
    "measure": 64.0,
    "dual_measure": 0.3,
    "psf_direct": 64.0,
    "psf_dual": 12.0,
    "decompose": 280.0,
    "probe": [2.0, 4.0, 8.0],
}

_DEFAULT_TOLERANCES = {"psf_rel": 1e-3, "support": 1e-6, "atom": 1e-9}


class RunContext:
    """Validated configuration with resolved defaults."""

    def __init__(self, raw: dict):
        try:
            jsonschema.validate(raw, _SCHEMA)
        except jsonschema.ValidationError as err:
            field = "/".join(str(p) for p in err.absolute_path) or "<root>"
            raise ConfigError(f"config field {field}: {err.message}") from None
        self.raw = raw
        self.seed = int(raw.get("seed", 0))
        self.lattice = (
            Lattice2D.from_json(raw["lattice"]) if "lattice" in raw else default_lattice()
        )
        self.staircase = (
            Staircase.from_json(raw["staircase"]) if "staircase" in raw else Staircase.default()
        )
        build_kwargs = dict(raw.get("construction", {}))
        if "dual_cut_step" in build_kwargs:
            build_kwargs["dual_cut_step"] = Fraction(*build_kwargs["dual_cut_step"])
        if "lobe_specs" in build_kwargs:
            build_kwargs["lobe_specs"] = tuple(
                (int(b), float(w)) for b, w in build_kwargs["lobe_specs"]
            )
        self.build = BuildConfig(**build_kwargs)
        self.windows = {**_DEFAULT_WINDOWS, **raw.get("windows", {})}
        self.tolerances = {**_DEFAULT_TOLERANCES, **raw.get("tolerances", {})}

    def describe(self) -> dict:
        return {
            "seed": self.seed,
            "lattice": self.lattice.to_json(),
            "staircase": self.staircase.to_json(),
            "construction": _config_json(self.build),
            "windows": self.windows,
            "tolerances": self.tolerances,
        }


def _load_context(args) -> RunContext:
    raw = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config: {err}") from None
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    if getattr(args, "steps", None) is not None:
        raw.setdefault("construction", {})["stages"] = args.steps
    for item in getattr(args, "tolerance", None) or []:
        if "=" not in item:
            raise ConfigError(f"bad --tolerance {item!r}, expected KEY=VAL")
        key, val = item.split("=", 1)
        try:
            raw.setdefault("tolerances", {})[key] = float(val)
        except ValueError:
            raise ConfigError(f"bad tolerance value {val!r}") from None
    return RunContext(raw)


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(path: Path, report: dict):
    path.write_text(canonical_json(report) + "\n")


def _load_state(args) -> BuildState:
    path = getattr(args, "state", None)
    if not path:
        raise ConfigError("this command needs --state pointing at a construct output")
    try:
        return BuildState.from_json(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError, KeyError) as err:
        raise ConfigError(f"cannot load state: {err}") from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_construct(args) -> int:
    ctx = _load_context(args)
    state = run_stages(ctx.build, ctx.lattice, ctx.staircase)
    out = _out_dir(args)
    (out / "state.json").write_text(canonical_json(state.to_json()) + "\n")
    reports = [r.to_json() for r in state.reports]
    ok = all(r.passed(ctx.build) for r in state.reports)
    _emit(out / "stage_reports.json", wrap_report("stage_reports", ctx.describe(), {
        "stages": reports, "all_passed": ok,
    }))
    return 0 if ok else 1


def cmd_sets(args) -> int:
    ctx = _load_context(args)
    out = _out_dir(args)
    kind = SetKind(args.kind)
    window = Fraction(args.window if args.window is not None else 16)
    if kind in (SetKind.SUPPORT, SetKind.FREQ_FORBIDDEN):
        lattice, stair = ctx.lattice, ctx.staircase
        kwargs = {}
    else:
        state = _load_state(args)
        lattice = state.lattice.dual()
        stair = state.dual_staircase()
        kwargs = {}
        if kind is SetKind.NODES:
            kwargs["cut"] = state.config.dual_cut(max(1, state.stage))
        elif kind is SetKind.STAGE_VANISH:
            kwargs["stage"] = state.stage
        elif kind is SetKind.TIME_FORBIDDEN:
            kwargs["stage"] = state.stage
            window = min(window, Fraction(state.heights[-1]))
        elif kind is SetKind.SPECTRUM:
            top = state.config.dual_cut(state.stage)
            window = min(window, Fraction(top) - Fraction(1, 1000))
    pts = generate_points(kind, lattice, stair, window, **kwargs)
    write_csv(
        out / f"set_{kind.value}.csv",
        ["value_float", "a_num", "a_den", "b_num", "b_den", "c_num", "c_den", "d_num", "d_den", "m", "n"],
        pts.to_csv_rows(),
    )
    polyline = staircase_polyline(ctx.staircase, 6)
    _emit(out / "staircase.json", wrap_report("staircase", ctx.describe(), {
        "kind": kind.value,
        "window": float(window),
        "count": len(pts),
        "boundary_polyline_quadrant1": polyline,
    }))
    return 0


def _measures_from_state(ctx, state, which, window, atom_tol):
    fn = state.function
    if which == "direct":
        return lattice_comb(ctx.lattice, fn.eval_hat, window, atom_tol=atom_tol)
    return dual_comb(ctx.lattice, lambda xs: fn.eval(xs), window, atom_tol=atom_tol)


def cmd_measure(args) -> int:
    ctx = _load_context(args)
    state = _load_state(args)
    out = _out_dir(args)
    which = args.which
    window = float(args.window) if args.window is not None else ctx.windows[
        "measure" if which == "direct" else "dual_measure"
    ]
    measure = _measures_from_state(ctx, state, which, window, ctx.tolerances["atom"])
    write_csv(
        out / f"measure_{which}.csv",
        ["position_float", "a_num", "a_den", "b_num", "b_den", "c_num", "c_den", "d_num", "d_den", "weight"],
        measure.to_csv_rows(),
    )
    _emit(out / f"measure_{which}.json", wrap_report("measure", ctx.describe(), {
        "which": which,
        "window": window,
        "atoms": len(measure),
        "tb_norm": tb_norm(measure),
        "dropped_max": measure.dropped_max,
        "weight_signs": measure.sign_counts(),
    }))
    return 0


def cmd_verify(args) -> int:
    ctx = _load_context(args)
    state = _load_state(args)
    out = _out_dir(args)
    fn = state.function
    if args.check == "psf":
        mu = lattice_comb(ctx.lattice, fn.eval_hat, ctx.windows["psf_direct"],
                          atom_tol=ctx.tolerances["atom"])
        nu = dual_comb(ctx.lattice, lambda xs: fn.eval(xs), ctx.windows["psf_dual"],
                       atom_tol=ctx.tolerances["atom"])
        rng = np.random.default_rng(ctx.seed)
        tests = [
            GaussianTest(center=float(rng.uniform(-3, 3)), width=float(rng.uniform(0.5, 2)))
            for _ in range(10)
        ]
        report = poisson_check(mu, nu, tests, tolerance=ctx.tolerances["psf_rel"])
        ok = report.max_relative_gap() <= ctx.tolerances["psf_rel"]
        _emit(out / "verify_psf.json", wrap_report("psf", ctx.describe(), {
            **report.to_json(), "passed": ok,
        }))
        return 0 if ok else 1
    if args.check == "support":
        mu = lattice_comb(ctx.lattice, fn.eval_hat, ctx.windows["measure"],
                          atom_tol=ctx.tolerances["atom"])
        support_set = generate_points(
            SetKind.SUPPORT, ctx.lattice, ctx.staircase, Fraction(ctx.windows["measure"])
        )
        ok1, stray1, worst1 = support_check(mu, support_set, ctx.tolerances["support"])
        nu = dual_comb(ctx.lattice, lambda xs: fn.eval(xs), ctx.windows["dual_measure"],
                       atom_tol=ctx.tolerances["atom"])
        spectrum_set = generate_points(
            SetKind.SPECTRUM, ctx.lattice.dual(), state.dual_staircase(),
            Fraction(ctx.windows["dual_measure"]),
        )
        ok2, stray2, worst2 = support_check(nu, spectrum_set, ctx.tolerances["support"])
        _emit(out / "verify_support.json", wrap_report("support", ctx.describe(), {
            "direct": {"passed": ok1, "stray": stray1, "worst_position": worst1,
                       "atoms": len(mu), "weight_signs": mu.sign_counts()},
            "dual": {"passed": ok2, "stray": stray2, "worst_position": worst2,
                     "atoms": len(nu), "weight_signs": nu.sign_counts()},
            "passed": ok1 and ok2,
        }))
        return 0 if ok1 and ok2 else 1
    if args.check == "tb":
        mu = lattice_comb(ctx.lattice, fn.eval_hat, ctx.windows["measure"],
                          atom_tol=ctx.tolerances["atom"])
        half = lattice_comb(ctx.lattice, fn.eval_hat, ctx.windows["measure"] / 2,
                            atom_tol=ctx.tolerances["atom"])
        full_norm, half_norm = tb_norm(mu), tb_norm(half)
        stable = abs(full_norm - half_norm) <= 0.05 * max(full_norm, 1e-12)
        _emit(out / "verify_tb.json", wrap_report("tb", ctx.describe(), {
            "window": ctx.windows["measure"],
            "tb_norm": full_norm,
            "tb_norm_half_window": half_norm,
            "stable_within_5pct": stable,
            "passed": math.isfinite(full_norm),
        }))
        return 0 if math.isfinite(full_norm) else 1
    raise ConfigError(f"unknown verify target {args.check!r}")


def cmd_probe(args) -> int:
    ctx = _load_context(args)
    out = _out_dir(args)
    det = ctx.lattice.det_abs_float()
    interval = (-0.75, 0.75)
    threshold = 1.5 / det
    windows = ctx.windows["probe"]
    reports = {}
    for label, factor in (("above", 1.5), ("below", 0.5)):
        half = 0.5 * factor * threshold
        rep = interpolation_probe(ctx.lattice, interval, IntervalUnion.single(-half, half), windows)
        reports[label] = rep
    conds_above = [w["condition"] for w in reports["above"]["windows"]]
    conds_below = [w["condition"] for w in reports["below"]["windows"]]
    bounded = all(b < 10 * a for a, b in zip(conds_above, conds_above[1:]))
    growing = all(
        (not math.isfinite(b)) or b >= 10 * a for a, b in zip(conds_below, conds_below[1:])
    )
    _emit(out / "probe_interpolation.json", wrap_report("probe", ctx.describe(), {
        "threshold": threshold,
        "above": reports["above"],
        "below": reports["below"],
        "above_bounded": bounded,
        "below_growing": growing,
        "passed": bounded and growing,
    }))
    return 0 if bounded and growing else 1


def _parse_field_value(text: str) -> AlgebraicReal:
    """a/b[+c/d r2][+e/f r3][+g/h r6], e.g. '1/2+1r2'."""
    coeffs = {"": Fraction(0), "r2": Fraction(0), "r3": Fraction(0), "r6": Fraction(0)}
    for part in text.replace("-", "+-").split("+"):
        part = part.strip()
        if not part:
            continue
        key = ""
        for tag in ("r2", "r3", "r6"):
            if part.endswith(tag):
                key = tag
                part = part[: -len(tag)]
                break
        part = part or "1"
        if part == "-":
            part = "-1"
        coeffs[key] += Fraction(part)
    return AlgebraicReal(coeffs[""], coeffs["r2"], coeffs["r3"], coeffs["r6"])


def cmd_ap(args) -> int:
    ctx = _load_context(args)
    out = _out_dir(args)
    lat, stair = ctx.lattice, ctx.staircase

    def support_values(radius):
        return generate_points(SetKind.SUPPORT, lat, stair, Fraction(radius)).values

    if args.ap_command == "count":
        prog = Progression(_parse_field_value(args.first), _parse_field_value(args.diff))
        values = support_values(args.window or 64)
        count, matches = ap_count(values, prog)
        _emit(out / "ap_count.json", wrap_report("ap_count", ctx.describe(), {
            "first": args.first, "diff": args.diff, "window": float(args.window or 64),
            "count": count, "matches": [float(v) for v in matches],
        }))
        return 0
    if args.ap_command == "saturate":
        rng = np.random.default_rng(ctx.seed)
        radii = [float(stair.x_cut(k)) for k in (2, 3, 4)]
        progs = sample_progressions(rng, args.samples, rational_only=True)
        rows = []
        saturated = 0
        for prog in progs:
            counts = ap_saturation(support_values, prog, radii)
            sat = counts[-1][1] == counts[-2][1]
            saturated += sat
            rows.append({"first": float(prog.first), "diff": float(prog.diff),
                         "counts": counts, "saturated": sat})
        _emit(out / "ap_saturation.json", wrap_report("ap_saturation", ctx.describe(), {
            "radii": radii, "samples": len(progs), "saturated": saturated,
            "all_saturated": saturated == len(progs), "rows": rows,
        }))
        return 0 if saturated == len(progs) else 1
    if args.ap_command == "triples":
        pts = generate_points(SetKind.SUPPORT, lat, stair, Fraction(args.window or 64))
        triples = ap_triples(pts)
        violations = [t for t in triples if not (t["collinear"] and t["non_horizontal"])]
        _emit(out / "ap_triples.json", wrap_report("ap_triples", ctx.describe(), {
            "window": float(args.window or 64),
            "triples": len(triples),
            "violations": len(violations),
        }))
        return 0 if not violations else 1
    if args.ap_command == "cover":
        diffs = [Fraction(p, q) for p in range(1, 9) for q in (1, 2, 3)]
        rows = []
        for k in (2, 3, 4):
            radius = stair.x_cut(k)
            pts = generate_points(SetKind.SUPPORT, lat, stair, radius)
            res = ap_cover_probe(list(pts.values), args.k, diffs)
            rows.append({"window": float(radius), "fraction": res["fraction"],
                         "chosen": res["chosen"], "note": res["note"]})
        decreasing = all(a["fraction"] > b["fraction"] for a, b in zip(rows, rows[1:]))
        _emit(out / "ap_cover.json", wrap_report("ap_cover", ctx.describe(), {
            "k": args.k, "rows": rows, "fraction_decreasing": decreasing,
        }))
        return 0
    raise ConfigError(f"unknown ap command {args.ap_command!r}")


def cmd_decompose(args) -> int:
    ctx = _load_context(args)
    state = _load_state(args)
    out = _out_dir(args)
    window = float(args.window) if args.window is not None else ctx.windows["decompose"]
    mu = lattice_comb(ctx.lattice, state.function.eval_hat, window,
                      atom_tol=ctx.tolerances["atom"])
    rows = []
    norms = []
    for stage in range(1, state.stage + 1):
        inside, outside, rest_norm = model_set_split(mu, stage, ctx.staircase)
        norms.append(rest_norm)
        write_csv(
            out / f"decompose_model_stage{stage}.csv",
            ["position_float", "a_num", "a_den", "b_num", "b_den", "c_num", "c_den", "d_num", "d_den", "weight"],
            inside.to_csv_rows(),
        )
        write_csv(
            out / f"decompose_rest_stage{stage}.csv",
            ["position_float", "a_num", "a_den", "b_num", "b_den", "c_num", "c_den", "d_num", "d_den", "weight"],
            outside.to_csv_rows(),
        )
        rows.append({"stage": stage, "model_atoms": len(inside),
                     "rest_atoms": len(outside), "rest_tb_norm": rest_norm})
    decreasing = all(a > b for a, b in zip(norms, norms[1:]))
    _emit(out / "decompose.json", wrap_report("decompose", ctx.describe(), {
        "window": window, "stages": rows, "rest_norm_strictly_decreasing": decreasing,
    }))
    return 0 if decreasing else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--out", help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="seed for sampled experiments")
    p.add_argument("--tolerance", action="append", metavar="KEY=VAL",
                   help="override a tolerance (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasicomb",
        description="atomic measures with discrete closed support and spectrum",
    )
    parser.add_argument("--version", action="version", version=f"quasicomb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="run the staged construction")
    _add_common(p)
    p.add_argument("--steps", type=int, help="number of stages")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("sets", help="enumerate a generated point set")
    _add_common(p)
    p.add_argument("--kind", required=True, choices=[k.value for k in SetKind])
    p.add_argument("--window", type=float)
    p.add_argument("--state", help="construct output (needed for dual-side sets)")
    p.set_defaults(func=cmd_sets)

    p = sub.add_parser("measure", help="build the direct or dual measure")
    _add_common(p)
    p.add_argument("--which", required=True, choices=["direct", "dual"])
    p.add_argument("--window", type=float)
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("verify", help="verification reports")
    _add_common(p)
    p.add_argument("check", choices=["psf", "support", "tb"])
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("probe", help="empirical probes")
    _add_common(p)
    p.add_argument("probe_kind", choices=["interpolation"])
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("ap", help="arithmetic-progression analysis")
    _add_common(p)
    p.add_argument("ap_command", choices=["count", "saturate", "cover", "triples"])
    p.add_argument("--first", default="0", help="progression first term (field value)")
    p.add_argument("--diff", default="1", help="progression difference (field value)")
    p.add_argument("--window", type=float)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("-k", type=int, default=5, help="progressions in the cover probe")
    p.set_defaults(func=cmd_ap)

    p = sub.add_parser("decompose", help="model-set / remainder split per stage")
    _add_common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--window", type=float)
    p.set_defaults(func=cmd_decompose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(json.dumps({"error": "config", "message": str(err)}))
        return 2
    except QuasicombError as err:
        print(json.dumps({"error": type(err).__name__, "message": str(err)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
