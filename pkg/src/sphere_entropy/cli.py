"""Command-line experiment runner.

Subcommands: rates, cover, verify, oracle, lambda, props.  Every subcommand
accepts ``--config FILE.json`` holding the same options (dashes or
underscores); flags given on the command line win.  Exit codes: 0 success,
1 invalid input, 2 certification failure, 3 solver failure.
"""

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import report
from .covering import (Ball, Covering, Face, Sphere, cover_ball_grid, cover_face_grid,
                       lift_sphere_cover, verify_covering)
from .entropy import (VERIFY_LIMIT, CertificationError, estimate_series, fit_decay_rate)
from .geometry import FaceChart
from .norms import (Lp, NormSpecError, fundamental_function, fundamental_function_formula,
                    spec_from_dict, spec_from_json)
from .oracle import covering_number_oracle, packing_oracle
from .suites import builtin_specs, lipschitz_suite, mazur_scan, monotonicity_suite

EXIT_OK, EXIT_INVALID, EXIT_CERT, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# -- option parsing helpers --------------------------------------------------

def parse_range(text):
    """'6..24' -> [6, ..., 24]; '3,5,8' -> [3, 5, 8]; '7' -> [7]."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise UsageError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"cannot parse integer range {text!r}") from None


def parse_q(text):
    t = str(text).strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    try:
        q = float(t)
    except ValueError:
        raise UsageError(f"cannot parse q={text!r}") from None
    if not q > 0:
        raise UsageError("q must be positive")
    return q


def parse_norm(value):
    if isinstance(value, dict):
        return spec_from_dict(value)
    text = str(value)
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8")
    return spec_from_json(text)


def metric_norm(name, d):
    """'linf', 'l1', 'l2', 'l0.5' or 'lp:0.5' -> Lp spec."""
    t = name.strip().lower()
    if t.startswith("lp:"):
        t = "l" + t[3:]
    if not t.startswith("l"):
        raise UsageError(f"unknown metric {name!r}")
    return Lp(t[1:], d)


def parse_chart(text, d):
    """'1,-1:0' -> FaceChart(e=(1, -1), i=0)."""
    try:
        signs, i = str(text).split(":")
        e = tuple(int(v) for v in signs.split(","))
        chart = FaceChart(e, int(i))
    except ValueError as exc:
        raise UsageError(f"cannot parse chart {text!r}: {exc}") from None
    if chart.dim != d:
        raise UsageError("chart and norm dimensions differ")
    return chart


def _apply_config(args, defaults):
    """Fill unset options from --config, then from the subcommand defaults."""
    config = {}
    if getattr(args, "config", None):
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid config JSON: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object")
        config = {k.replace("-", "_"): v for k, v in config.items()}
        unknown = set(config) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key, default in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, default))
    return args


def _emit(args, text, default_name=None):
    if args.out:
        report.write_text(args.out, text)
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------

RATES_DEFAULTS = {"norm": None, "q": "inf", "k": "6..24", "target": "sphere", "seed": 0,
                  "threads": 1, "out": None, "samples": 20_000, "verify_limit": VERIFY_LIMIT,
                  "lower": True, "plot": None, "json": None}


def _rates_cell(spec_dict, target, q, k, samples, verify_limit, seed, lower):
    spec = spec_from_dict(spec_dict)
    return estimate_series(spec, target, q, [k], samples, verify_limit, seed,
                           lower=lower)[0]


def cmd_rates(args):
    _apply_config(args, RATES_DEFAULTS)
    if args.norm is None:
        raise UsageError("--norm is required")
    spec = parse_norm(args.norm)
    q = parse_q(args.q)
    ks = parse_range(args.k)
    if not ks or min(ks) < 1:
        raise UsageError("k values must be >= 1")
    if args.target not in ("sphere", "ball"):
        raise UsageError("--target must be sphere or ball")
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    cells = [(spec.to_dict(), args.target, q, k, int(args.samples), int(args.verify_limit),
              int(args.seed), bool(args.lower)) for k in ks]
    if args.threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            estimates = list(pool.map(_rates_cell, *zip(*cells)))
    else:
        estimates = [_rates_cell(*c) for c in cells]
    series = [(e.k, e.upper) for e in estimates]
    fit = fit_decay_rate(series) if len(series) >= 4 and len(set(ks)) >= 2 else None
    p_label = spec.p if spec.family == "lp" else spec.family
    text = report.csv_text(report.RATES_COLUMNS,
                           report.rates_rows(estimates, p_label, fit.slope if fit else None))
    _emit(args, text)
    sidecar = args.json or (str(Path(args.out).with_suffix(".json")) if args.out else None)
    if sidecar:
        report.write_text(sidecar, report.json_text({
            "norm": spec.to_dict(), "q": q, "target": args.target, "seed": args.seed,
            "fit": None if fit is None else fit.__dict__ | {"k_range": list(fit.k_range)},
            "estimates": [e.to_dict() for e in estimates],
            "constant_note": "envelope constants set to 1; fitted intercept estimates them",
        }))
    if args.plot:
        report.plot_rates(args.plot, estimates, fit, title=spec.to_json())
    if fit is not None:
        print(f"slope {fit.slope!r} (expected {-1 / (spec.dim - 1)!r}) residual {fit.residual!r}",
              file=sys.stderr)
    return EXIT_OK


COVER_DEFAULTS = {"norm": None, "eps": None, "target": "sphere", "chart": None,
                  "format": None, "out": None, "seed": 0, "threads": 1}


def cmd_cover(args):
    _apply_config(args, COVER_DEFAULTS)
    if args.norm is None or args.eps is None:
        raise UsageError("--norm and --eps are required")
    spec = parse_norm(args.norm)
    eps = float(args.eps)
    if args.target == "sphere":
        cover = lift_sphere_cover(spec, eps)
    elif args.target == "ball":
        cover = cover_ball_grid(spec, eps)
    elif args.target == "face":
        if args.chart is None:
            raise UsageError("--chart is required for --target face")
        cover = cover_face_grid(spec, parse_chart(args.chart, spec.dim), eps)
    else:
        raise UsageError("--target must be sphere, ball or face")
    fmt = args.format or ("csv" if args.out and str(args.out).endswith(".csv") else "json")
    _emit(args, cover.to_csv() if fmt == "csv" else cover.to_json())
    print(f"{len(cover)} centres, radius {cover.radius!r}", file=sys.stderr)
    return EXIT_OK


VERIFY_DEFAULTS = {"cover": None, "norm": None, "target": None, "chart": None,
                   "samples": 100_000, "seed": 0, "out": None, "threads": 1}


def _load_cover(path):
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"covering file is not JSON: {exc}") from None
    if not obj:
        return None
    return Covering.from_dict(obj)


def cmd_verify(args):
    _apply_config(args, VERIFY_DEFAULTS)
    if args.cover is None:
        raise UsageError("--cover is required")
    cover = _load_cover(args.cover)
    if cover is None or len(cover) == 0:
        _emit(args, report.json_text({"passed": False, "reason": "empty covering"}))
        return EXIT_CERT
    meta = cover.meta or {}
    spec = parse_norm(args.norm) if args.norm is not None else (
        spec_from_dict(meta["target_norm"]) if "target_norm" in meta else None)
    if spec is None:
        raise UsageError("--norm is required (the covering records no target norm)")
    kind = args.target or {"sphere_lift": "sphere", "ball_grid": "ball",
                           "grid_face": "face"}.get(cover.provenance, "sphere")
    if kind == "sphere":
        target = Sphere(spec)
    elif kind == "ball":
        target = Ball(spec)
    elif kind == "face":
        chart = (parse_chart(args.chart, spec.dim) if args.chart
                 else FaceChart(**meta["chart"]) if "chart" in meta else None)
        if chart is None:
            raise UsageError("--chart is required for face targets")
        target = Face(spec, chart)
    else:
        raise UsageError("--target must be sphere, ball or face")
    rep = verify_covering(cover, target, int(args.samples), int(args.seed))
    _emit(args, report.json_text(rep.to_dict()))
    return EXIT_OK if rep.passed else EXIT_CERT


ORACLE_DEFAULTS = {"d": None, "eps": None, "metric": "linf", "norm": None, "target": "ball",
                   "mode": "exact", "resolution": None, "packing": False, "out": None,
                   "seed": 0, "threads": 1}


def cmd_oracle(args):
    _apply_config(args, ORACLE_DEFAULTS)
    if args.eps is None:
        raise UsageError("--eps is required")
    if args.norm is not None:
        spec = parse_norm(args.norm)
    elif args.d is not None:
        spec = metric_norm(args.metric, int(args.d))
    else:
        raise UsageError("--d (with --metric) or --norm is required")
    eps = float(args.eps)
    target = {"ball": Ball, "sphere": Sphere}.get(args.target)
    if target is None:
        raise UsageError("--target must be ball or sphere")
    T = target(spec)
    n = covering_number_oracle(T, eps, args.resolution, args.mode)
    if args.packing:
        m = packing_oracle(T, eps, args.resolution)
        _emit(args, report.json_text({"covering": n, "packing": m, "eps": eps,
                                      "norm": spec.to_dict(), "target": args.target,
                                      "mode": args.mode}))
    else:
        _emit(args, f"{n}\n")
    return EXIT_OK


LAMBDA_DEFAULTS = {"norm": None, "k": None, "out": None, "seed": 0, "threads": 1}


def cmd_lambda(args):
    _apply_config(args, LAMBDA_DEFAULTS)
    if args.norm is None:
        raise UsageError("--norm is required")
    spec = parse_norm(args.norm)
    ks = parse_range(args.k) if args.k is not None else list(range(1, spec.dim + 1))
    rows = [[k, fundamental_function(spec, k), fundamental_function_formula(spec, k)]
            for k in ks]
    _emit(args, report.csv_text(["k", "lambda", "formula"], rows))
    return EXIT_OK


PROPS_DEFAULTS = {"d": "2..6", "suite": "all", "pairs": 10_000, "seed": 0, "norm": None,
                  "mazur_pairs": 10_000, "out": None, "threads": 1}


def cmd_props(args):
    _apply_config(args, PROPS_DEFAULTS)
    if args.suite not in ("lipschitz", "monotonicity", "mazur", "all"):
        raise UsageError("--suite must be lipschitz, monotonicity, mazur or all")
    dims = parse_range(args.d)
    rows, failed = [], False
    if args.suite in ("lipschitz", "monotonicity", "all"):
        for d in dims:
            if d < 2:
                raise UsageError("suites need d >= 2")
            specs = [parse_norm(args.norm).with_dim(d)] if args.norm else builtin_specs(d)
            for spec in specs:
                for name, fn in (("lipschitz", lipschitz_suite),
                                 ("monotonicity", monotonicity_suite)):
                    if args.suite in (name, "all"):
                        r = fn(spec, int(args.pairs), int(args.seed))
                        failed |= not r.passed
                        rows.append([r.suite, spec.to_json(), d, r.charts, r.pairs,
                                     r.violations, r.worst_excess, ""])
    if args.suite in ("mazur", "all"):
        for p in (0.5, 1.0):
            for est in mazur_scan(p, pairs=int(args.mazur_pairs), seed=int(args.seed)):
                rows.append(["mazur", Lp(p, est.d).to_json(), est.d, "", est.pairs, "", "",
                             est.lipschitz])
    header = ["suite", "norm", "d", "charts", "pairs", "violations", "worst_excess",
              "lipschitz"]
    _emit(args, report.csv_text(header, rows))
    return EXIT_CERT if failed else EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="sphere-entropy",
        description="Certified entropy-number bounds for unit spheres of quasi-normed spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with default options (flags win)")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int, help="worker processes (rates only)")
        p.add_argument("--out", help="output file (default: stdout)")
        return p

    p = common(sub.add_parser("rates", help="upper/lower bound series, rate fit, envelope"))
    p.add_argument("--norm", help="norm JSON, or @file")
    p.add_argument("--q", help="target exponent of l_q (default inf)")
    p.add_argument("--k", help="k values: '6..24' or '6,8,10'")
    p.add_argument("--target", choices=["sphere", "ball"])
    p.add_argument("--samples", type=int, help="verification samples per covering")
    p.add_argument("--verify-limit", type=int, help="largest covering built and verified")
    p.add_argument("--no-lower", dest="lower", action="store_false", default=None)
    p.add_argument("--plot", help="also write a PNG figure (needs matplotlib)")
    p.add_argument("--json", help="JSON sidecar path (default: --out with .json)")
    p.set_defaults(func=cmd_rates)

    p = common(sub.add_parser("cover", help="construct and serialize a covering"))
    p.add_argument("--norm")
    p.add_argument("--eps", type=float)
    p.add_argument("--target", choices=["sphere", "ball", "face"])
    p.add_argument("--chart", help="face chart 'signs:i', e.g. '1,-1:0'")
    p.add_argument("--format", choices=["json", "csv"])
    p.set_defaults(func=cmd_cover)

    p = common(sub.add_parser("verify", help="check a serialized covering by sampling"))
    p.add_argument("--cover", help="covering JSON file")
    p.add_argument("--norm", help="target norm (default: recorded in the file)")
    p.add_argument("--target", choices=["sphere", "ball", "face"])
    p.add_argument("--chart")
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("oracle", help="covering/packing numbers of tiny instances"))
    p.add_argument("--d", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--metric", help="target ball norm: linf, l1, l2, l0.5 (default linf)")
    p.add_argument("--norm", help="target norm JSON (overrides --d/--metric)")
    p.add_argument("--target", choices=["ball", "sphere"])
    p.add_argument("--mode", choices=["exact", "greedy"])
    p.add_argument("--resolution", type=int)
    p.add_argument("--packing", action="store_true", default=None,
                   help="also report the packing number, as JSON")
    p.set_defaults(func=cmd_oracle)

    p = common(sub.add_parser("lambda", help="fundamental-function table"))
    p.add_argument("--norm")
    p.add_argument("--k", help="k values (default 1..dim)")
    p.set_defaults(func=cmd_lambda)

    p = common(sub.add_parser("props", help="sampled Lipschitz/monotonicity/Mazur suites"))
    p.add_argument("--d", help="dimensions, default '2..6'")
    p.add_argument("--suite", help="lipschitz, monotonicity, mazur or all")
    p.add_argument("--pairs", type=int, help="pairs per chart")
    p.add_argument("--mazur-pairs", type=int)
    p.add_argument("--norm", help="run one norm (dimension taken from --d) instead of the six")
    p.set_defaults(func=cmd_props)
    return parser


def run(argv=None):
    """Parse ``argv`` and run; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    except (UsageError, NormSpecError, ValueError, TypeError, KeyError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
