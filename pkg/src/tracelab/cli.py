"""Config-driven batch front end.

Subcommands:
    run <config.json> [...]   validate all configs, run each experiment,
                              write <name>.report.json and <name>.csv
    list [--json]             available experiment kinds
    constants --n N --s S     one-off sharp-constant computation (JSON to stdout)

Exit codes: 0 success, 1 config error (no partial outputs), 2 hypothesis
violation (e.g. curvature certificate failure), 3 numerical
non-convergence.  Worker count for multiple configs comes from
TRACELAB_WORKERS (default: all cores).  Reports are deterministic for a
fixed (config, seed, version) apart from the wall_clock_seconds field.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .constants import (
    SearchGrid,
    c1_trace_constant,
    convert_smoothing_to_trace,
    gamma_closed_form_constant,
    walther_smoothing_constant,
)
from .fields import make_test_function, random_band_limited_field, sobolev_norm
from .special_functions import WeightSpec
from .surfaces import build_quadrature, coarea_verify
from .symbols import (
    ConvergenceError,
    CurvatureError,
    SymbolError,
    check_homogeneity_euler,
    dual_eval,
    symbol_from_config,
)
from .verify import (
    TimeProfile,
    critical_comparison,
    duality_check,
    rho_scan,
    sharpness_run,
    trace_norm,
)

SCHEMA_VERSION = 1

EXPERIMENT_KINDS = {
    "constants": "sharp constant by Gamma closed form, Bessel supremum, and smoothing conversion",
    "trace": "single trace ratio of a named test function against a Sobolev norm",
    "rho-scan": "dilation ladder of supremal trace ratios with a fitted rate exponent",
    "sharpness": "truncated optimal profiles approaching the sharp constant",
    "critical": "plain vs wedge-filtered trace ratios at regularity 1/2",
    "duality": "adjoint-propagator identity against the coarea decomposition",
    "surface-checks": "symbol/surface diagnostics: homogeneity, curvature, coarea, dual round trip",
}


class ConfigError(ValueError):
    pass


_COMMON_KEYS = {"schema_version", "kind", "name", "seed", "output_dir"}

_KIND_KEYS = {
    "constants": {"n", "s", "sigma", "w", "k_max", "t_lo", "t_hi", "t_points"},
    "trace": {"symbol", "function", "rho", "s", "flavor", "resolution"},
    "rho-scan": {"symbol", "s", "rho_lo", "rho_hi", "rho_points", "weights", "k"},
    "sharpness": {"n", "s", "R_ladder", "sigma", "w"},
    "critical": {"symbol", "k", "R_ladder"},
    "duality": {
        "symbol", "function", "ghat_center", "ghat_width", "resolution",
        "extent", "samples",
    },
    "surface-checks": {"symbol", "resolution", "samples_check"},
}

_REQUIRED = {
    "constants": {"n"},
    "trace": {"symbol", "function", "s"},
    "rho-scan": {"symbol", "s"},
    "sharpness": {"n"},
    "critical": {"symbol", "k"},
    "duality": {"symbol", "function"},
    "surface-checks": {"symbol"},
}


def _weight_from_config(cfg) -> WeightSpec:
    if not isinstance(cfg, dict) or set(cfg) != {"family", "exponent"}:
        raise ConfigError(
            f"weight spec must be {{'family', 'exponent'}}, got {cfg!r}"
        )
    try:
        return WeightSpec(cfg["family"], float(cfg["exponent"]))
    except ValueError as e:
        raise ConfigError(str(e)) from e


def validate_config(raw: dict, default_name: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version must be {SCHEMA_VERSION}, got {raw.get('schema_version')!r}"
        )
    kind = raw.get("kind")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    allowed = _COMMON_KEYS | _KIND_KEYS[kind]
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown config fields for kind {kind}: {sorted(unknown)}")
    missing = _REQUIRED[kind] - set(raw)
    if missing:
        raise ConfigError(f"missing required fields for kind {kind}: {sorted(missing)}")
    cfg = dict(raw)
    cfg.setdefault("name", default_name)
    cfg.setdefault("seed", 0)
    cfg.setdefault("output_dir", ".")
    return cfg


def _load_symbol(cfg):
    try:
        return symbol_from_config(cfg["symbol"])
    except (SymbolError, KeyError, TypeError) as e:
        raise ConfigError(f"bad symbol descriptor: {e}") from e


def _make_function(cfg, n):
    fn_cfg = dict(cfg["function"])
    family = fn_cfg.pop("family", None)
    if family is None:
        raise ConfigError("function descriptor needs a 'family'")
    if family == "random-band-limited":
        return random_band_limited_field(n, seed=int(cfg.get("seed", 0)), **fn_cfg)
    return make_test_function(family, n, **fn_cfg)


# -- experiment runners -------------------------------------------------


def _run_constants(cfg):
    n = int(cfg["n"])
    grid = SearchGrid(
        lo=float(cfg.get("t_lo", 1e-3)),
        hi=float(cfg.get("t_hi", 1e3)),
        points=int(cfg.get("t_points", 49)),
    )
    k_max = int(cfg.get("k_max", 8))
    results = {}
    rows = []
    if "s" in cfg and "w" not in cfg:
        s = float(cfg["s"])
        sigma = WeightSpec("power", s - 1.0)
        w = WeightSpec("power", s)
        gamma = gamma_closed_form_constant(n, s)
        results["gamma_closed_form"] = gamma.as_dict()
        rows.append(("gamma-closed-form", gamma.value))
    else:
        sigma = _weight_from_config(cfg.get("sigma", {"family": "power", "exponent": -0.5}))
        w = _weight_from_config(cfg["w"])
    c1 = c1_trace_constant(n, sigma, w, t_grid=grid, k_max=k_max)
    c0 = walther_smoothing_constant(n, sigma, w, t_grid=grid, k_max=k_max)
    results["bessel_supremum"] = c1.as_dict()
    results["smoothing"] = c0.as_dict()
    rows.append(("bessel-supremum", None if c1.divergent else c1.value))
    rows.append(("smoothing", None if c0.divergent else c0.value))
    if not c0.divergent:
        conv = convert_smoothing_to_trace(c0, n)
        results["smoothing_converted"] = conv.as_dict()
        rows.append(("smoothing-converted", conv.value))
        if "gamma_closed_form" in results:
            g = results["gamma_closed_form"]["value"]
            results["max_pairwise_rel_gap"] = max(
                abs(c1.value / g - 1.0), abs(conv.value / g - 1.0)
            )
    return results, rows, ("method", "value")


def _run_trace(cfg):
    sym = _load_symbol(cfg)
    f = _make_function(cfg, sym.n)
    rho = float(cfg.get("rho", 1.0))
    s = float(cfg["s"])
    flavor = cfg.get("flavor", "homogeneous")
    resolution = int(cfg.get("resolution", 48))
    q = build_quadrature(sym, rho, resolution)
    lhs = trace_norm(f, q)
    rhs = sobolev_norm(f, s, flavor)
    ratio = lhs / rhs if math.isfinite(rhs) and rhs > 0 else math.nan
    results = {"rho": rho, "lhs": lhs, "rhs": rhs, "ratio": ratio, "flavor": flavor}
    return results, [(rho, lhs, rhs, ratio)], ("rho_or_R", "lhs", "rhs", "ratio")


def _run_rho_scan(cfg):
    sym = _load_symbol(cfg)
    rhos = np.geomspace(
        float(cfg.get("rho_lo", 0.5)),
        float(cfg.get("rho_hi", 8.0)),
        int(cfg.get("rho_points", 8)),
    )
    rep = rho_scan(
        sym,
        float(cfg["s"]),
        rhos,
        weights=cfg.get("weights", "power"),
        k=int(cfg.get("k", 0)),
    )
    return rep.as_dict(), rep.rows, ("rho_or_R", "lhs", "rhs", "ratio")


def _run_sharpness(cfg):
    n = int(cfg["n"])
    ladder = [float(R) for R in cfg.get("R_ladder", (10.0, 40.0, 160.0))]
    kwargs = {}
    if "s" in cfg:
        kwargs["s"] = float(cfg["s"])
    if "sigma" in cfg:
        kwargs["sigma"] = _weight_from_config(cfg["sigma"])
    if "w" in cfg:
        kwargs["w"] = _weight_from_config(cfg["w"])
    rep = sharpness_run(n, R_ladder=ladder, **kwargs)
    return rep.as_dict(), rep.rows, ("rho_or_R", "lhs", "rhs", "ratio")


def _run_critical(cfg):
    sym = _load_symbol(cfg)
    ladder = [float(R) for R in cfg.get("R_ladder", (10.0, 1e2, 1e3, 1e4))]
    rep = critical_comparison(sym, int(cfg["k"]), ladder)
    rows = [
        (R, plain, wedge, plain / wedge if wedge > 0 else math.inf)
        for R, plain, wedge in rep.rows
    ]
    return rep.as_dict(), rows, ("rho_or_R", "plain_ratio", "wedge_ratio", "plain_over_wedge")


def _run_duality(cfg):
    sym = _load_symbol(cfg)
    fn_cfg = dict(cfg["function"])
    fn_cfg.setdefault("extent", cfg.get("extent"))
    fn_cfg.setdefault("samples", cfg.get("samples"))
    tf = make_test_function(fn_cfg.pop("family"), sym.n, **fn_cfg)
    g = TimeProfile(
        center=float(cfg.get("ghat_center", 2.5)),
        width=float(cfg.get("ghat_width", 1.4)),
    )
    rep = duality_check(sym, g, tf.grid, resolution=int(cfg.get("resolution", 96)))
    rows = [(r, gv, sh, gv * sh) for r, gv, sh in rep.rows]
    return rep.as_dict(), rows, ("rho_or_R", "ghat_sq", "shell_integral", "integrand")


def _run_surface_checks(cfg):
    sym = _load_symbol(cfg)
    resolution = int(cfg.get("resolution", 128))
    samples = int(cfg.get("samples_check", 256))
    seed = int(cfg.get("seed", 0))
    hom = check_homogeneity_euler(sym, samples=samples, seed=seed)
    min_det = sym.min_hessian_det_on_level(resolution)
    co = coarea_verify(
        sym, lambda p: np.exp(-np.sum(p**2, axis=-1)), resolution=min(resolution, 64)
    )
    results = {
        "homogeneity_defect": hom.max_homogeneity_defect,
        "euler_defect": hom.max_euler_defect,
        "min_hessian_det": min_det,
        "curvature_ok": bool(min_det >= 0.01),
        "coarea_gap": co.rel_gap,
    }
    if min_det >= 0.01:
        rng = np.random.default_rng(seed)
        dirs = rng.normal(size=(32, sym.n))
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        from .symbols import NumericalDualSymbol, QuadraticSymbol, dual_symbol

        dual = dual_symbol(sym)
        roundtrip = (
            NumericalDualSymbol(dual) if not isinstance(dual, QuadraticSymbol)
            else dual_symbol(dual)
        )
        defect = np.abs(roundtrip.value(dirs) / sym.value(dirs) - 1.0).max()
        results["dual_roundtrip_defect"] = float(defect)
    rows = [(k, v) for k, v in results.items()]
    return results, rows, ("check", "value")


_RUNNERS = {
    "constants": _run_constants,
    "trace": _run_trace,
    "rho-scan": _run_rho_scan,
    "sharpness": _run_sharpness,
    "critical": _run_critical,
    "duality": _run_duality,
    "surface-checks": _run_surface_checks,
}

_write_lock = threading.Lock()


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _sanitize(obj):
    """Make results JSON-strict: infinities and nans become strings."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def run_job(cfg: dict) -> dict:
    t0 = time.perf_counter()
    results, rows, header = _RUNNERS[cfg["kind"]](cfg)
    wall = time.perf_counter() - t0
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": cfg["kind"],
        "config": _sanitize(cfg),
        "library_version": __version__,
        "results": _sanitize(results),
        "wall_clock_seconds": round(wall, 3),
    }
    out_dir = Path(cfg["output_dir"])
    with _write_lock:
        out_dir.mkdir(parents=True, exist_ok=True)
        report_path = out_dir / f"{cfg['name']}.report.json"
        report_path.write_text(
            json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"
        )
        csv_path = out_dir / f"{cfg['name']}.csv"
        with csv_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    return report


def _cmd_run(args) -> int:
    configs = []
    for path in args.configs:
        p = Path(path)
        try:
            raw = json.loads(p.read_text())
        except (OSError, json.JSONDecodeError) as e:
            print(f"config error in {path}: {e}", file=sys.stderr)
            return 1
        try:
            cfg = validate_config(raw, default_name=p.stem)
        except ConfigError as e:
            print(f"config error in {path}: {e}", file=sys.stderr)
            return 1
        if args.output_dir is not None:
            cfg["output_dir"] = args.output_dir
        configs.append(cfg)

    workers = int(os.environ.get("TRACELAB_WORKERS", os.cpu_count() or 1))
    failures = []

    def job(cfg):
        try:
            run_job(cfg)
            return None
        except (CurvatureError,) as e:
            return (2, cfg["name"], str(e))
        except (ConvergenceError,) as e:
            return (3, cfg["name"], str(e))

    if workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            failures = [r for r in pool.map(job, configs) if r is not None]
    else:
        failures = [r for r in map(job, configs) if r is not None]

    for code, name, msg in failures:
        kind = "hypothesis violation" if code == 2 else "numerical non-convergence"
        print(f"{name}: {kind}: {msg}", file=sys.stderr)
    if any(code == 2 for code, *_ in failures):
        return 2
    if failures:
        return 3
    return 0


def _cmd_list(args) -> int:
    if args.json:
        print(json.dumps(EXPERIMENT_KINDS, indent=2, sort_keys=True))
    else:
        width = max(map(len, EXPERIMENT_KINDS))
        for kind, doc in EXPERIMENT_KINDS.items():
            print(f"{kind:<{width}}  {doc}")
    return 0


def _cmd_constants(args) -> int:
    n = args.n
    try:
        if args.bracket is not None:
            sigma = WeightSpec("power", -0.5)
            w = WeightSpec("bracket", args.bracket)
            c1 = c1_trace_constant(n, sigma, w)
            out = {"bessel_supremum": c1.as_dict()}
        else:
            if args.s is None:
                raise ConfigError("need --s (power weights) or --bracket S")
            cfg = validate_config(
                {"schema_version": 1, "kind": "constants", "n": n, "s": args.s},
                default_name="constants",
            )
            out, _, _ = _run_constants(cfg)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(json.dumps(_sanitize(out), indent=2, sort_keys=True, default=_json_default))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tracelab",
        description="Numerical experiments for hypersurface trace inequalities.",
    )
    parser.add_argument("--version", action="version", version=f"tracelab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run experiment configs")
    p_run.add_argument("configs", nargs="+", metavar="config.json")
    p_run.add_argument("--output-dir", default=None)
    p_run.set_defaults(fn=_cmd_run)

    p_list = sub.add_parser("list", help="list experiment kinds")
    p_list.add_argument("--json", action="store_true")
    p_list.set_defaults(fn=_cmd_list)

    p_const = sub.add_parser("constants", help="compute a sharp constant")
    p_const.add_argument("--n", type=int, required=True)
    p_const.add_argument("--s", type=float, default=None)
    p_const.add_argument(
        "--bracket", type=float, default=None, metavar="S",
        help="use the bracket weight (1+r^2)^(S/2) with sigma = t^(-1/2)",
    )
    p_const.set_defaults(fn=_cmd_constants)

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; fold into the config-error code
        return 0 if not e.code else 1
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
