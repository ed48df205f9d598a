"""Acceptance criteria, one test each, at their stated tolerances and runtimes.

Each test records a PASS/FAIL line (printed in the pytest terminal summary by
``conftest.py``).  Run as a script to print the lines directly::

    python3 tests/test_acceptance.py
"""

import itertools
import math
import time

import numpy as np

from returntimes.complexity import complexity_rate, repetition_bound_check
from returntimes.estimators import (dimension_ensemble, entropy_ow, entropy_ow_from_series,
                                    hofbauer_crosscheck, local_dimension_from_measure,
                                    lyapunov_birkhoff, lyapunov_ensemble)
from returntimes.experiment import ExperimentConfig, run_experiment
from returntimes.maps import make_builtin_map, orbit, sample_initial_point
from returntimes.recurrence import scan_scales
from returntimes.symbolic import (cylinder_return_time, cylinder_return_time_bruteforce,
                                  generate_bernoulli_word)

LOG2, LOG3 = math.log(2), math.log(3)
RESULTS = []
ENSEMBLE_GRID = list(np.geomspace(10**-1.5, 1e-5, 8))


def _report(number, ok, detail, seconds, limit):
    within = seconds < limit
    line = (f"criterion {number:>2} {'PASS' if ok and within else 'FAIL'}: {detail} "
            f"[{seconds:.1f}s / {limit:.0f}s]")
    RESULTS.append(line)
    assert ok, line
    assert within, line


def test_criterion_01_cylinder_oracle():
    t0 = time.perf_counter()
    bad = 0
    for n in range(1, 15):
        for bits in itertools.product((0, 1), repeat=n):
            bad += cylinder_return_time(bits) != cylinder_return_time_bruteforce(bits)
    rng = np.random.default_rng(2024)
    for _ in range(10**4):
        w = rng.integers(0, 3, int(rng.integers(1, 201)))
        bad += cylinder_return_time(w) != cylinder_return_time_bruteforce(w)
    _report(1, bad == 0, f"{2**15 - 2} binary + 10000 ternary words, {bad} mismatches",
            time.perf_counter() - t0, 60)


def _bernoulli_ratios(n, seeds=100):
    return np.array([cylinder_return_time(generate_bernoulli_word(2, [0.5, 0.5], n, s)) / n
                     for s in range(seeds)])


def test_criterion_02_full_entropy_band():
    t0 = time.perf_counter()
    r30, r100 = _bernoulli_ratios(30), _bernoulli_ratios(100)
    ok = r30.max() <= 1 and r30.mean() >= 0.9 and r100.mean() > 1 - r30.mean() \
        and r100.mean() >= r30.mean()
    _report(2, ok, f"max {r30.max():.3f}, mean n=30 {r30.mean():.3f}, "
                   f"mean n=100 {r100.mean():.3f}", time.perf_counter() - t0, 60)


def test_criterion_03_zero_entropy_contrast():
    t0 = time.perf_counter()
    m = make_builtin_map("rotation")
    series = [scan_scales("cylinder-return", m, sample_initial_point(m, s), [100, 1000], seed=s)
              for s in range(32)]
    means = np.array([s.values for s in series], dtype=float).mean(axis=0) / [100, 1000]
    ok = all(0.05 < v < 0.95 for v in means)
    _report(3, ok, f"golden rotation mean ratio n=100 {means[0]:.3f}, n=1000 {means[1]:.3f}",
            time.perf_counter() - t0, 60)


def test_criterion_04_ornstein_weiss_bernoulli():
    t0 = time.perf_counter()
    words = [generate_bernoulli_word(2, [0.5, 0.5], 10**7, s) for s in range(32)]
    agg = entropy_ow(words, [18])
    ok = abs(agg.mean - LOG2) <= 0.1 * LOG2
    _report(4, ok, f"mean log R_18 / 18 = {agg.mean:.4f} ({agg.mean / LOG2:.3f} log 2)",
            time.perf_counter() - t0, 120)


def test_criterion_05_lyapunov_tripling():
    t0 = time.perf_counter()
    m = make_builtin_map("tripling")
    series = [scan_scales("ball-set-return", m, sample_initial_point(m, s), ENSEMBLE_GRID, seed=s)
              for s in range(32)]
    agg = lyapunov_ensemble(series)
    ok = abs(agg.mean - LOG3) <= 0.1 * LOG3
    _report(5, ok, f"ball-return lambda {agg.mean:.4f} vs log 3 = {LOG3:.4f}",
            time.perf_counter() - t0, 300)


def _dimension(name, params=()):
    m = make_builtin_map(name, params)
    series = [scan_scales("point-return", m, sample_initial_point(m, s), ENSEMBLE_GRID, seed=s)
              for s in range(32)]
    return dimension_ensemble(series)


def test_criterion_06_dimension():
    t0 = time.perf_counter()
    trip = _dimension("tripling")
    t1 = time.perf_counter()
    gauss = _dimension("gauss", [10**9])
    t2 = time.perf_counter()
    ok = abs(trip.mean - 1) <= 0.1 and abs(gauss.mean - 1) <= 0.1
    _report(6, ok and t1 - t0 < 300, f"tripling {trip.mean:.4f}, gauss {gauss.mean:.4f}",
            t2 - t0, 600)


def test_criterion_07_hofbauer_gauss():
    t0 = time.perf_counter()
    m = make_builtin_map("gauss", [10**9])
    lam = lyapunov_birkhoff(m, range(32), 10**5)
    reps = [scan_scales("repetition", m, sample_initial_point(m, s), [1, 2, 3, 4], seed=s,
                        scan_limit=10**7) for s in range(64)]
    h = entropy_ow_from_series(reps, correction="euler")
    series = [scan_scales("point-return", m, sample_initial_point(m, 5000 + s), ENSEMBLE_GRID,
                          seed=s) for s in range(32)]
    d = dimension_ensemble(series)
    rep = hofbauer_crosscheck(h, lam, d)
    target = math.pi**2 / (6 * LOG2)
    ok = abs(lam.mean - target) <= 0.05 * target and rep.discrepancy < 0.15
    _report(7, ok, f"lambda {lam.mean:.4f} (target {target:.4f}), h {h.mean:.4f}, "
                   f"d {d.mean:.4f}, |d - h/lambda| = {rep.discrepancy:.4f}",
            time.perf_counter() - t0, 600)


def test_criterion_08_local_dimension_logistic():
    t0 = time.perf_counter()
    m = make_builtin_map("logistic", [4])
    o = orbit(m, sample_initial_point(m, 0), 10**7)
    mid = local_dimension_from_measure(o, 0.5, np.geomspace(1e-1, 1e-5, 9))
    edge = local_dimension_from_measure(o, 0.0, np.geomspace(1e-1, 1e-7, 13))
    ok = abs(mid.value - 1) <= 0.1 and abs(edge.value - 0.5) <= 0.15 * 0.5
    _report(8, ok, f"slope at 0.5 {mid.value:.4f}, at 0 {edge.value:.4f}",
            time.perf_counter() - t0, 300)


def test_criterion_09_complexity_rate():
    t0 = time.perf_counter()
    fair = complexity_rate(generate_bernoulli_word(2, [0.5, 0.5], 10**6, 0))
    periodic = complexity_rate(np.resize([0, 1], 10**6))
    ok = abs(fair - LOG2) <= 0.1 * LOG2 and periodic < 0.02
    _report(9, ok, f"fair bits {fair:.4f} ({fair / LOG2:.3f} log 2), (01)* {periodic:.2e}",
            time.perf_counter() - t0, 120)


def test_criterion_10_repetition_compression():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    worst, allowed = -math.inf, 10 * math.log2(10**4)
    for _ in range(1000):
        prefix = rng.integers(0, 2, int(rng.integers(1, 1001)))
        rep = repetition_bound_check(prefix, 10**4)
        worst = max(worst, rep.added)
    _report(10, worst <= allowed, f"worst added phrases {worst} vs allowed {allowed:.1f}",
            time.perf_counter() - t0, 120)


def test_criterion_11_determinism(tmp_path):
    t0 = time.perf_counter()
    quantities = ["cylinder-return", "point-return", "ball-return", "repetition", "complexity",
                  "lyapunov", "dimension", "entropy", "crosscheck"]
    runs = [run_experiment(ExperimentConfig.from_dict(
        {"map": "tripling", "quantities": quantities, "out": str(tmp_path / name)}))
        for name in ("a", "b")]
    payload = [f for f in runs[0].files if f != "manifest.json"]
    same = payload == [f for f in runs[1].files if f != "manifest.json"] and all(
        (runs[0].out / f).read_bytes() == (runs[1].out / f).read_bytes() for f in payload)
    _report(11, same, f"{len(payload)} payload files byte-identical across two runs",
            time.perf_counter() - t0, 600)


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                pass
            print(RESULTS[-1])
