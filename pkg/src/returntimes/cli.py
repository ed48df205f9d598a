"""Command-line entry point: ``returntimes <subcommand> ...``.

Subcommands go from exploration to full pipelines: ``maps list``, ``orbit``,
``returns``, ``estimate``, ``experiment`` and ``selftest``.
"""

from __future__ import annotations

import argparse
import json
import sys
import textwrap

from . import __version__
from .estimators import (dimension_ensemble, entropy_ow_from_series, hofbauer_crosscheck,
                         lyapunov_ensemble)
from .errors import ReturnTimesError
from .experiment import (EXIT_DEGRADED, EXIT_FAILED, EXIT_OK, ConfigError, ExperimentConfig,
                         load_schema, run_experiment, seed_streams)
from .maps import (BUILTIN_DEFAULTS, builtin_names, make_builtin_map, orbit, parse_map_spec,
                   sample_initial_point)
from .recurrence import scan_scales
from .series import read_csv, series_to_csv


def _float_list(text: str) -> list:
    return [float(t) for t in text.replace(",", " ").split()]


def _int_list(text: str) -> list:
    return [int(t) for t in text.replace(",", " ").split()]


def _str_list(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


def _config_help() -> str:
    lines = ["config fields (JSON object; flags override the file):"]
    for name, spec in load_schema()["properties"].items():
        default = spec.get("default")
        head = f"  {name}" + (f" (default {json.dumps(default)})" if default is not None else "")
        lines.append(head)
        lines += textwrap.wrap(spec.get("description", ""), 76, initial_indent="      ",
                               subsequent_indent="      ")
        for sub, sspec in spec.get("properties", {}).items():
            lines.append(f"      {sub}: {sspec.get('description', '')}")
    return "\n".join(lines)


def _add_common(p, *, grids=True):
    p.add_argument("--config", metavar="PATH", help="JSON config file (see `experiment --help`)")
    p.add_argument("--map", metavar="NAME", help='map spec, e.g. "tripling" or "logistic:4"')
    p.add_argument("--seeds", type=int, metavar="N", help="number of sampled initial points")
    p.add_argument("--master-seed", type=int, metavar="K", help="master RNG seed")
    p.add_argument("--out", metavar="DIR", help="output directory (or file for single outputs)")
    if grids:
        p.add_argument("--quantities", type=_str_list, metavar="LIST",
                       help="comma-separated subset of quantities")
        p.add_argument("--r-grid", type=_float_list, metavar="LIST", help="radii, comma separated")
        p.add_argument("--n-grid", type=_int_list, metavar="LIST", help="word lengths, comma separated")
        p.add_argument("--budget-scale", type=float, metavar="X", help="multiplier on default budgets")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="returntimes",
        description="Return times, repetition times and complexity along orbits of interval maps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("maps", help="list the built-in maps")
    p.add_argument("action", choices=["list"])

    p = sub.add_parser("orbit", help="print or save orbit segments from sampled seeds")
    _add_common(p, grids=False)
    p.add_argument("--length", type=int, default=20, help="points per orbit (default 20)")

    fmt = argparse.RawDescriptionHelpFormatter
    p = sub.add_parser("returns", help="return-time series as CSV", epilog=_config_help(),
                       formatter_class=fmt)
    _add_common(p)

    p = sub.add_parser("estimate", help="estimates from series CSV files",
                       description="Reads CSVs written by `returns` or `experiment` and prints "
                                   "JSON estimates for lyapunov, dimension, entropy and crosscheck.")
    p.add_argument("csv", nargs="+", help="series CSV files")
    p.add_argument("--quantities", type=_str_list, metavar="LIST",
                   default=["lyapunov", "dimension", "entropy"])
    p.add_argument("--entropy-correction", choices=["none", "euler"], default="none")
    p.add_argument("--out", metavar="PATH", help="write the JSON here instead of stdout")

    p = sub.add_parser("experiment", help="full seed-ensemble pipeline", epilog=_config_help(),
                       formatter_class=fmt)
    _add_common(p)
    p.add_argument("--workers", type=int, metavar="N", help="worker processes (default 1)")

    p = sub.add_parser("selftest", help="run the oracle-equivalence suites")
    p.add_argument("--quick", action="store_true", help="smaller sizes, a few seconds")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    overrides = {
        "map": args.map, "seeds": args.seeds, "master_seed": args.master_seed, "out": args.out,
        "quantities": getattr(args, "quantities", None), "r_grid": getattr(args, "r_grid", None),
        "n_grid": getattr(args, "n_grid", None), "budget_scale": getattr(args, "budget_scale", None),
        "workers": getattr(args, "workers", None),
    }
    if args.config:
        return ExperimentConfig.from_file(args.config, overrides)
    data = {k: v for k, v in overrides.items() if v is not None}
    if "map" not in data:
        raise ConfigError(["map: required (use --map or --config)"])
    return ExperimentConfig.from_dict(data)


def cmd_maps(args) -> int:
    for name in builtin_names():
        m = make_builtin_map(name)
        defaults = BUILTIN_DEFAULTS.get(name)
        tags = [t for t, on in (("markov", m.markov), ("zero-entropy", m.zero_entropy),
                                ("exact-only", m.exact_only)) if on]
        extra = f" default params {list(defaults)}" if defaults else ""
        print(f"{name:<18} measure={m.invariant_measure_id or '-':<9} {' '.join(tags)}{extra}")
    return EXIT_OK


def cmd_orbit(args) -> int:
    spec = args.map
    if args.config:
        spec = spec or json.loads(open(args.config).read()).get("map")
    if not spec:
        raise ConfigError(["map: required (use --map or --config)"])
    m = parse_map_spec(spec)
    lines = ["seed,step,x"]
    for seed in seed_streams(args.master_seed or 0, args.seeds or 1):
        o = orbit(m, sample_initial_point(m, seed, 64 if m.exact_only else None), args.length)
        lines += [f"{seed},{k},{format(float(p), '.17g')}" for k, p in enumerate(o.points)]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_returns(args) -> int:
    cfg = _config_from_args(args)
    m = parse_map_spec(cfg.map)
    series = []
    wanted = [q for q in cfg.quantities if q in ("cylinder-return", "point-return", "ball-return",
                                                  "repetition")]
    for seed in seed_streams(cfg.master_seed, cfg.seeds):
        x = sample_initial_point(m, seed)
        for q in wanted:
            kind = "ball-set-return" if q == "ball-return" else q
            grid = sorted(cfg.r_grid, reverse=True) if q in ("point-return", "ball-return") \
                else sorted(cfg.n_grid)
            series.append(scan_scales(kind, m, x, grid, seed=seed, budget_scale=cfg.budget_scale))
    text = series_to_csv(series)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_DEGRADED if any(not r.ok for s in series for r in s.rows) else EXIT_OK


def cmd_estimate(args) -> int:
    series = [s for path in args.csv for s in read_csv(path)]
    for s in series:
        s.meta["map"] = "from-csv"
    by_kind = {}
    for s in series:
        by_kind.setdefault(s.kind, []).append(s)
    out, status = {}, EXIT_OK
    jobs = {
        "lyapunov": lambda: lyapunov_ensemble(by_kind.get("ball-set-return", [])),
        "dimension": lambda: dimension_ensemble(by_kind.get("point-return", [])),
        "entropy": lambda: entropy_ow_from_series(by_kind.get("repetition", []),
                                                  args.entropy_correction),
    }
    aggs = {}
    for q in args.quantities:
        if q == "crosscheck":
            continue
        if q not in jobs:
            raise ConfigError([f"quantities: {q} cannot be estimated from series files"])
        try:
            aggs[q] = jobs[q]()
            out[q] = aggs[q].to_record()
        except (ReturnTimesError, ValueError) as exc:
            out[q] = {"error": f"{type(exc).__name__}: {exc}"}
            status = EXIT_DEGRADED
    if "crosscheck" in args.quantities:
        if all(k in aggs for k in ("entropy", "lyapunov", "dimension")):
            out["crosscheck"] = hofbauer_crosscheck(aggs["entropy"], aggs["lyapunov"],
                                                    aggs["dimension"]).to_record()
        else:
            out["crosscheck"] = {"error": "needs lyapunov, entropy and dimension"}
            status = EXIT_DEGRADED
    text = json.dumps(out, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def cmd_experiment(args) -> int:
    cfg = _config_from_args(args)
    res = run_experiment(cfg)
    for p in res.problems:
        print(f"warning: {p}", file=sys.stderr)
    print(f"wrote {len(res.files)} files to {res.out} (status {res.status})")
    return res.status


def cmd_selftest(args) -> int:
    from .selftest import run_all

    results = run_all(quick=args.quick)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.ok for r in results) else EXIT_DEGRADED


COMMANDS = {"maps": cmd_maps, "orbit": cmd_orbit, "returns": cmd_returns,
            "estimate": cmd_estimate, "experiment": cmd_experiment, "selftest": cmd_selftest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ReturnTimesError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
