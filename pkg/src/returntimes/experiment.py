"""Seed-ensemble experiments: config validation, per-seed pipelines and artifacts.

A run writes, into the output directory,

* ``seed_000.csv`` ... one file per seed holding every requested return series;
* ``lyapunov.json``, ``dimension.json``, ``entropy.json``, ``crosscheck.json``
  and ``complexity.json`` for the requested estimates;
* ``manifest.json`` with the config hash, library version, wall-clock time,
  per-seed failures and payload checksums.

Everything except the manifest is a pure function of the config (the output
path excluded), so reruns are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .complexity import complexity_report
from .errors import HypothesisViolation, InsufficientData, ReturnTimesError
from .estimators import (aggregate, dimension_ensemble, entropy_ow_from_series, envelope_profile,
                         hofbauer_crosscheck, lyapunov_ensemble, Estimate, Fit)
from .maps import log_derivative_sum, parse_map_spec, sample_initial_point
from .recurrence import DEFAULT_SCAN_LIMIT, PIECE_CAP, _coded_word, scan_scales
from .series import series_to_csv

SERIES_QUANTITIES = {
    "cylinder-return": "cylinder-return",
    "point-return": "point-return",
    "ball-return": "ball-set-return",
    "repetition": "repetition",
}
PREREQUISITES = {
    "lyapunov": ("ball-return",),
    "dimension": ("point-return",),
    "entropy": ("repetition",),
    "crosscheck": ("lyapunov", "entropy", "dimension"),
}
ESTIMATE_FILES = ("lyapunov", "dimension", "entropy", "crosscheck", "complexity")

EXIT_OK, EXIT_DEGRADED, EXIT_FAILED = 0, 1, 2


class ConfigError(ValueError):
    """Invalid experiment configuration; ``problems`` lists every issue found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid config:\n" + "\n".join(f"  - {p}" for p in self.problems))


def load_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("config_schema.json").read_text())


def schema_defaults() -> dict:
    return {k: v["default"] for k, v in load_schema()["properties"].items() if "default" in v}


@dataclass
class ExperimentConfig:
    map: str
    seeds: int = 8
    master_seed: int = 0
    r_grid: list = field(default_factory=lambda: list(schema_defaults()["r_grid"]))
    n_grid: list = field(default_factory=lambda: list(schema_defaults()["n_grid"]))
    budgets: dict = field(default_factory=dict)
    budget_scale: float = 1.0
    out: str = "results"
    quantities: list = field(default_factory=lambda: list(schema_defaults()["quantities"]))
    birkhoff_length: int = 100_000
    complexity_length: int = 100_000
    entropy_correction: str = "none"
    crosscheck_lyapunov: str = "birkhoff"
    crosscheck_tolerance: float = 0.15
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        validate_config(data)
        merged = {**schema_defaults(), **data}
        return cls(**merged)

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict):
            raise ConfigError([f"{path}: top level must be a JSON object"])
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def payload_dict(self) -> dict:
        d = self.to_dict()
        d.pop("out")
        d.pop("workers")
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.payload_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _sorted(xs) -> bool:
    return all(b > a for a, b in zip(xs, xs[1:])) or all(b < a for a, b in zip(xs, xs[1:]))


def validate_config(data: dict) -> None:
    """Check ``data`` against the schema and the cross-field rules.

    Raises :class:`ConfigError` listing every problem, not just the first.
    """
    problems = []
    validator = jsonschema.Draft202012Validator(load_schema())
    for err in sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path)):
        where = ".".join(str(p) for p in err.absolute_path) or "config"
        problems.append(f"{where}: {err.message}")
    if isinstance(data, dict):
        quantities = data.get("quantities", schema_defaults()["quantities"])
        if isinstance(quantities, list):
            for q in quantities:
                for need in PREREQUISITES.get(q, ()):
                    if need not in quantities:
                        problems.append(f"quantities: {q} requires {need}")
        for key in ("r_grid", "n_grid"):
            grid = data.get(key)
            if isinstance(grid, list) and grid and not _sorted(grid):
                problems.append(f"{key}: must be strictly sorted without repeats")
        spec = data.get("map")
        if isinstance(spec, str):
            try:
                m = parse_map_spec(spec)
            except (ValueError, TypeError) as exc:
                problems.append(f"map: {exc}")
            else:
                if m.exact_only:
                    problems.append(f"map: {m.name} runs only in exact mode; use its Bernoulli "
                                    "symbolic model instead of an orbit experiment")
                elif m.invariant_measure_id is None:
                    problems.append(f"map: {m.label} has no invariant-measure sampler")
    if problems:
        raise ConfigError(problems)


def seed_streams(master_seed: int, count: int) -> list:
    """Independent per-seed RNG seeds spawned from the master seed."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


# -- per-seed work -----------------------------------------------------------


def _run_seed(cfg: dict, index: int, seed: int) -> dict:
    # runs in a worker process; inputs and outputs are plain picklable data
    m = parse_map_spec(cfg["map"])
    q = cfg["quantities"]
    budgets = cfg["budgets"]
    radii = sorted(cfg["r_grid"], reverse=True)
    ns = sorted(cfg["n_grid"])
    out = {"index": index, "seed": seed, "series": [], "errors": {}}
    try:
        x = sample_initial_point(m, seed)
    except (ReturnTimesError, ValueError) as exc:
        out["errors"]["sample"] = f"{type(exc).__name__}: {exc}"
        return out
    out["x"] = float(x)
    common = {"seed": seed, "budget_scale": cfg["budget_scale"]}
    for name, kind in SERIES_QUANTITIES.items():
        if name not in q:
            continue
        try:
            if kind == "point-return":
                s = scan_scales(kind, m, x, radii, budgets.get("point-return"), **common)
            elif kind == "ball-set-return":
                s = scan_scales(kind, m, x, radii, budgets.get("ball-return"), **common,
                                piece_cap=budgets.get("piece-cap", PIECE_CAP))
            elif kind == "repetition":
                s = scan_scales(kind, m, x, ns, **common,
                                scan_limit=budgets.get("repetition", DEFAULT_SCAN_LIMIT))
            else:
                s = scan_scales(kind, m, x, ns, **common)
            out["series"].append(s)
        except (ReturnTimesError, ValueError) as exc:
            out["errors"][name] = f"{type(exc).__name__}: {exc}"
    if "lyapunov" in q:
        n = cfg["birkhoff_length"]
        try:
            out["birkhoff"] = log_derivative_sum(m, x, n) / n
        except (ReturnTimesError, ArithmeticError, ValueError) as exc:
            out["errors"]["birkhoff"] = f"{type(exc).__name__}: {exc}"
    if "complexity" in q:
        try:
            out["complexity"] = complexity_report(_coded_word(m, x, cfg["complexity_length"])).to_record()
        except (ReturnTimesError, ValueError) as exc:
            out["errors"]["complexity"] = f"{type(exc).__name__}: {exc}"
    return out


def _dispatch(cfg: dict, seeds: list, workers: int) -> list:
    jobs = [(cfg, i, s) for i, s in enumerate(seeds)]
    if workers <= 1 or len(jobs) <= 1:
        results = [_run_seed(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_seed, *zip(*jobs)))
    # keyed by seed index so scheduling never changes the reduction order
    return sorted(results, key=lambda r: r["index"])


# -- reductions --------------------------------------------------------------


def _series_of(results, kind):
    return [s for r in results for s in r["series"] if s.kind == kind]


def _estimate_doc(quantity: str, cfg: ExperimentConfig, body: dict) -> dict:
    return {"quantity": quantity, "map": cfg.map, "config_hash": cfg.config_hash(), **body}


def _try(fn, *args, **kw):
    try:
        return fn(*args, **kw), None
    except (InsufficientData, HypothesisViolation, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _reduce(cfg: ExperimentConfig, results: list) -> tuple:
    docs, problems = {}, []
    q = cfg.quantities
    agg = {}

    if "lyapunov" in q:
        balls = _series_of(results, "ball-set-return")
        lam, err = _try(lyapunov_ensemble, balls)
        body = {"ball_return": lam.to_record() if lam else None,
                "per_seed": [e.to_record() for e in lam.per_seed] if lam else [],
                "envelope_profile": [[sc, v] for sc, v in envelope_profile(balls).items()],
                "error": err}
        birk = [Estimate(r["birkhoff"], "birkhoff",
                         Fit(r["birkhoff"], 0.0, 0.0, cfg.birkhoff_length, cfg.birkhoff_length),
                         cfg.birkhoff_length, seed=r["seed"])
                for r in results if "birkhoff" in r]
        bfail = {r["seed"]: r["errors"]["birkhoff"] for r in results if "birkhoff" in r["errors"]}
        b, berr = _try(aggregate, birk, "birkhoff", bfail)
        body["birkhoff"] = b.to_record() if b else None
        if berr:
            body["birkhoff_error"] = berr
        docs["lyapunov"] = _estimate_doc("lyapunov", cfg, body)
        agg["lyapunov"] = {"ball-return": lam, "birkhoff": b}[cfg.crosscheck_lyapunov]
        problems += [f"lyapunov: {e}" for e in (err, berr) if e]

    if "dimension" in q:
        d, err = _try(dimension_ensemble, _series_of(results, "point-return"))
        docs["dimension"] = _estimate_doc("dimension", cfg, {
            "point_return": d.to_record() if d else None,
            "per_seed": [e.to_record() for e in d.per_seed] if d else [],
            "error": err})
        agg["dimension"] = d
        if err:
            problems.append(f"dimension: {err}")

    if "entropy" in q:
        h, err = _try(entropy_ow_from_series, _series_of(results, "repetition"),
                      cfg.entropy_correction)
        docs["entropy"] = _estimate_doc("entropy", cfg, {
            "ornstein_weiss": h.to_record() if h else None,
            "per_seed": [e.to_record() for e in h.per_seed] if h else [],
            "error": err})
        agg["entropy"] = h
        if err:
            problems.append(f"entropy: {err}")

    if "crosscheck" in q:
        parts = [agg.get(k) for k in ("entropy", "lyapunov", "dimension")]
        if all(p is not None for p in parts):
            rep, err = _try(hofbauer_crosscheck, *parts, tolerance=cfg.crosscheck_tolerance)
        else:
            rep, err = None, "missing an input estimate"
        body = rep.to_record() if rep else {"error": err}
        body["lyapunov_source"] = cfg.crosscheck_lyapunov
        docs["crosscheck"] = _estimate_doc("crosscheck", cfg, body)
        if err:
            problems.append(f"crosscheck: {err}")

    if "complexity" in q:
        recs = [{"seed": r["seed"], **r["complexity"]} for r in results if "complexity" in r]
        rates = [c["rate_nats"] for c in recs]
        docs["complexity"] = _estimate_doc("complexity", cfg, {
            "mean_rate_nats": float(np.mean(rates)) if rates else None,
            "per_seed": recs})
        if not recs:
            problems.append("complexity: no seed produced a report")
    return docs, problems


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class ExperimentResult:
    status: int
    out: Path
    files: list
    problems: list


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every requested quantity over the seed ensemble and write the artifacts.

    Exit status: 0 when everything succeeded, 1 when some seeds or estimates
    failed but something was produced, 2 when every seed failed.
    """
    validate_config({k: v for k, v in config.to_dict().items()})
    t0 = time.perf_counter()
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    seeds = seed_streams(config.master_seed, config.seeds)
    results = _dispatch(config.payload_dict(), seeds, config.workers)

    files, payloads = [], {}
    width = max(3, len(str(config.seeds - 1)))
    for r in results:
        name = f"seed_{r['index']:0{width}d}.csv"
        payloads[name] = series_to_csv(r["series"])
    docs, problems = _reduce(config, results)
    for q, doc in docs.items():
        payloads[f"{q}.json"] = _dump(doc)
    for name, text in payloads.items():
        (out / name).write_text(text)
        files.append(name)

    seed_failures = {str(r["seed"]): r["errors"] for r in results if r["errors"]}
    flagged = sum(1 for r in results for s in r["series"] for row in s.rows if not row.ok)
    total_fail = not any(r["series"] or "birkhoff" in r or "complexity" in r for r in results)
    if total_fail:
        status = EXIT_FAILED
    elif seed_failures or problems:
        status = EXIT_DEGRADED
    else:
        status = EXIT_OK

    manifest = {
        "library": "returntimes",
        "version": __version__,
        "config": config.payload_dict(),
        "config_hash": config.config_hash(),
        "seeds": seeds,
        "started": started,
        "wall_clock_seconds": round(time.perf_counter() - t0, 3),
        "status": status,
        "problems": problems,
        "seed_failures": seed_failures,
        "flagged_rows": flagged,
        "files": {n: _sha(payloads[n]) for n in files},
    }
    (out / "manifest.json").write_text(_dump(manifest))
    files.append("manifest.json")
    return ExperimentResult(status, out, files, problems)
