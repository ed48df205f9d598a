"""Entropy, Lyapunov exponent and local dimension from recurrence data.

Every limit (``r -> 0`` or ``n -> infinity``) is replaced by an ordinary
least-squares fit over a finite grid.  Where the underlying statement is a
lower limit, the finite-scale lower envelope is reported next to the fit.
"Almost every x" is realised by an ensemble of sampled seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import CriticalPointError, BranchTruncationError, HypothesisViolation, InsufficientData
from .maps import IntervalMap, Orbit, log_derivative_sum, sample_initial_point
from .recurrence import empirical_ball_measure, repetition_series
from .series import ReturnSeries

MIN_FIT_ROWS = 4
MIN_BALL_COUNT = 50
OW_COMPLETION = 0.9
EULER_GAMMA = 0.5772156649015329
ENTROPY_CORRECTIONS = ("none", "euler")


class Fit(NamedTuple):
    slope: float
    intercept: float
    residual_rms: float
    scale_min: float
    scale_max: float


@dataclass
class Estimate:
    value: float
    method: str
    fit: Fit
    n_samples: int
    flags: list = field(default_factory=list)
    seed: int | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"{self.method}: estimate is not finite")
        if self.fit.residual_rms < 0:
            raise ValueError("negative residual")

    def to_record(self) -> dict:
        rec = {
            "method": self.method,
            "value": self.value,
            "slope": self.fit.slope,
            "intercept": self.fit.intercept,
            "residual_rms": self.fit.residual_rms,
            "scale_min": self.fit.scale_min,
            "scale_max": self.fit.scale_max,
            "n_samples": self.n_samples,
            "flags": list(self.flags),
            "seed": self.seed,
        }
        rec.update(self.extras)
        return rec


@dataclass
class AggregateEstimate:
    """Per-seed estimates with their mean and interquartile range."""

    per_seed: list
    mean: float
    spread: float
    method: str = ""
    failures: dict = field(default_factory=dict)
    mean_kind: str = "mean"

    def __post_init__(self):
        vals = [e.value for e in self.per_seed]
        if vals and not min(vals) - 1e-12 <= self.mean <= max(vals) + 1e-12:
            raise ValueError("mean outside the per-seed range")

    @property
    def value(self) -> float:
        return self.mean

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.per_seed])

    def to_record(self) -> dict:
        vals = self.values
        return {
            "method": f"{self.method}:{self.mean_kind}",
            "value": self.mean,
            "slope": None,
            "intercept": None,
            "residual_rms": None,
            "scale_min": min((e.fit.scale_min for e in self.per_seed), default=None),
            "scale_max": max((e.fit.scale_max for e in self.per_seed), default=None),
            "n_samples": len(self.per_seed),
            "flags": [f"failed:{s}:{why}" for s, why in sorted(self.failures.items(), key=str)],
            "seed": None,
            "spread": self.spread,
            "min": float(vals.min()) if vals.size else None,
            "max": float(vals.max()) if vals.size else None,
        }


def aggregate(estimates, method: str = "", failures=None, harmonic: bool = False) -> AggregateEstimate:
    """Ensemble mean and interquartile range of per-seed estimates.

    ``harmonic=True`` averages ``1/value`` and inverts, which is the right
    mean when each seed measures the reciprocal of the target (ball-return
    slopes estimate ``1/lambda``); it avoids the upward bias of averaging
    inverted noisy slopes.
    """
    ests = list(estimates)
    if not ests:
        raise InsufficientData(f"{method}: no seed produced an estimate")
    v = np.array([e.value for e in ests])
    q1, q3 = np.percentile(v, [25, 75])
    mean = float(1.0 / np.mean(1.0 / v)) if harmonic else float(v.mean())
    return AggregateEstimate(ests, mean, float(q3 - q1), method or ests[0].method,
                             dict(failures or {}), "harmonic" if harmonic else "mean")


def fit_loglog(xs, ys):
    """Ordinary least squares ``y = slope * x + intercept`` on the given coordinates.

    Returns ``(slope, intercept, residual_rms)``.

    >>> fit_loglog([0, 1, 2], [1, 3, 5])
    (2.0, 1.0, 0.0)
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size != y.size:
        raise ValueError("xs and ys differ in length")
    if x.size < 2:
        raise InsufficientData("at least two points are needed for a fit")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise InsufficientData("degenerate abscissae: all xs are equal")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    rms = float(math.sqrt(float(resid @ resid) / x.size))
    if rms < 1e-12 * (1.0 + float(np.abs(y).max())):
        rms = 0.0
    return slope, intercept, rms


# -- Lyapunov exponent -------------------------------------------------------


def lyapunov_birkhoff(m: IntervalMap, seeds, n: int) -> AggregateEstimate:
    """Birkhoff averages ``(1/n) S_n log|T'|`` from sampled initial points."""
    if n < 1:
        raise ValueError("n must be at least 1")
    ests, failures = [], {}
    for seed in seeds:
        x = sample_initial_point(m, seed)
        try:
            v = log_derivative_sum(m, x, n) / n
        except (CriticalPointError, BranchTruncationError) as exc:
            failures[seed] = type(exc).__name__
            continue
        ests.append(Estimate(v, "birkhoff", Fit(v, 0.0, 0.0, n, n), n, seed=seed))
    return aggregate(ests, "birkhoff", failures)


def _guard(series: ReturnSeries, kind: str):
    if series.kind != kind:
        raise ValueError(f"expected a {kind} series, got {series.kind}")
    if series.meta.get("zero_entropy"):
        raise HypothesisViolation(
            f"{series.meta.get('map', 'map')} has zero entropy; the return-time limit "
            "theorems only apply to measures of positive entropy")
    rows = series.usable
    if len(rows) < MIN_FIT_ROWS:
        raise InsufficientData(f"{len(rows)} usable rows, need {MIN_FIT_ROWS}")
    return rows


def lyapunov_from_ball_returns(series: ReturnSeries) -> Estimate:
    """Lyapunov exponent as the inverse slope of ``tau(B_r(x))`` against ``-log r``.

    ``extras["lower_envelope"]`` holds ``min_r tau/(-log r)``, the finite-scale
    stand-in for the lower limit that bounds ``1/lambda`` from below.
    """
    rows = _guard(series, "ball-set-return")
    xs = np.array([-math.log(r.scale) for r in rows])
    ys = np.array([float(r.value) for r in rows])
    slope, icpt, rms = fit_loglog(xs, ys)
    if slope <= 0:
        raise InsufficientData(f"nonpositive slope {slope:.3g}; no Lyapunov estimate")
    env = float(np.min(ys / xs))
    scales = [r.scale for r in rows]
    flags = [f"excluded:{r.scale:.6g}:{r.flag}" for r in series.rows if not r.ok]
    return Estimate(1.0 / slope, "ball-return", Fit(slope, icpt, rms, min(scales), max(scales)),
                    len(rows), flags, seed=series.seed, extras={"lower_envelope": env})


# -- entropy -----------------------------------------------------------------


def entropy_from_repetition(series: ReturnSeries, n_values=None,
                            correction: str = "none") -> Estimate:
    """``log R_n / n`` at the largest completed ``n`` of a repetition series.

    With ``correction="euler"`` the value is ``(log R_n + gamma) / n``.  For
    mixing sources ``R_n mu(C_n)`` is asymptotically exponential with mean 1,
    so ``log R_n`` undershoots ``-log mu(C_n)`` by Euler's constant on average;
    adding it back removes the leading finite-``n`` offset.  The uncorrected
    value is kept in ``extras["raw"]`` either way.
    """
    if series.kind != "repetition":
        raise ValueError("expected a repetition series")
    if correction not in ENTROPY_CORRECTIONS:
        raise ValueError(f"unknown correction {correction!r}; use one of {ENTROPY_CORRECTIONS}")
    rows = [r for r in series.usable if n_values is None or r.scale in n_values]
    if not rows:
        raise InsufficientData("no completed repetition time")
    last = max(rows, key=lambda r: r.scale)
    n = int(last.scale)
    raw = math.log(last.value) / n
    value = raw + EULER_GAMMA / n if correction == "euler" else raw
    if len(rows) >= 2:
        slope, icpt, rms = fit_loglog([r.scale for r in rows], [math.log(r.value) for r in rows])
    else:
        slope, icpt, rms = raw, 0.0, 0.0
    flags = [f"excluded:{int(r.scale)}:{r.flag}" for r in series.rows if not r.ok]
    method = "ornstein-weiss" if correction == "none" else f"ornstein-weiss-{correction}"
    return Estimate(value, method, Fit(slope, icpt, rms, min(r.scale for r in rows), n),
                    len(rows), flags, seed=series.seed, extras={"n": n, "raw": raw})


def entropy_ow(words, n_values, scan_limit: int | None = None,
               correction: str = "none") -> AggregateEstimate:
    """Entropy from repetition times ``log R_n / n`` over an ensemble of words.

    The ensemble is taken at the largest ``n`` that at least 90% of the words
    completed; words that missed it are listed as failures.  Requiring most
    words keeps the chosen ``n`` from being one where only the lucky, short
    returns were observed.
    """
    ns = sorted(int(n) for n in n_values)
    per_word = []
    for i, w in enumerate(words):
        s = repetition_series(w, ns, scan_limit)
        s.seed = i
        per_word.append(s)
    return _ow_ensemble(per_word, ns, correction)


def _ow_ensemble(series_list, ns, correction="none") -> AggregateEstimate:
    chosen = None
    for n in reversed(ns):
        done = sum(1 for s in series_list if any(r.ok and r.scale == n for r in s.rows))
        if done and done >= OW_COMPLETION * len(series_list):
            chosen = n
            break
    if chosen is None:
        raise InsufficientData(
            f"no prefix length was completed by {OW_COMPLETION:.0%} of the words")
    keep = [n for n in ns if n <= chosen]
    ests, failures = [], {}
    for s in series_list:
        if any(r.ok and r.scale == chosen for r in s.rows):
            ests.append(entropy_from_repetition(s, keep, correction))
        else:
            failures[s.seed] = f"no repetition at n={chosen}"
    return aggregate(ests, ests[0].method, failures)


def entropy_ow_from_series(series_list, correction: str = "none") -> AggregateEstimate:
    """Ensemble entropy from precomputed repetition series (one per seed)."""
    ns = sorted({int(r.scale) for s in series_list for r in s.rows})
    return _ow_ensemble(list(series_list), ns, correction)


# -- dimension ---------------------------------------------------------------


def dimension_from_point_returns(series: ReturnSeries) -> Estimate:
    """Local dimension as the slope of ``log tau_r(x)`` against ``-log r``."""
    rows = _guard(series, "point-return")
    xs = [-math.log(r.scale) for r in rows]
    ys = [math.log(r.value) for r in rows]
    slope, icpt, rms = fit_loglog(xs, ys)
    if slope <= 0:
        raise InsufficientData(f"nonpositive slope {slope:.3g}; no dimension estimate")
    scales = [r.scale for r in rows]
    flags = [f"excluded:{r.scale:.6g}:{r.flag}" for r in series.rows if not r.ok]
    return Estimate(slope, "point-return", Fit(slope, icpt, rms, min(scales), max(scales)),
                    len(rows), flags, seed=series.seed)


def local_dimension_from_measure(orb: Orbit, x, scales, metric: str = "flat",
                                 min_count: int = MIN_BALL_COUNT) -> Estimate:
    """Slope of ``log mu(B_r(x))`` against ``log r`` with ``mu`` the orbit occupation.

    Scales whose ball holds fewer than ``min_count`` orbit points are flagged
    as under-resolved; scales whose ball holds the whole orbit as saturated.
    """
    used, flags = [], []
    for r in scales:
        mu = empirical_ball_measure(orb, x, r, metric)
        count = round(mu * orb.length)
        if mu >= 1.0:
            flags.append(f"saturated:{r:.6g}")
        elif count < min_count:
            flags.append(f"under-resolved:{r:.6g}")
        else:
            used.append((r, mu))
    if len(used) < 2:
        raise InsufficientData("fewer than two resolved scales")
    slope, icpt, rms = fit_loglog([math.log(r) for r, _ in used], [math.log(mu) for _, mu in used])
    rs = [r for r, _ in used]
    return Estimate(slope, "ball-measure", Fit(slope, icpt, rms, min(rs), max(rs)),
                    len(used), flags)


# -- ensembles ---------------------------------------------------------------


def _per_seed(series_list, fn):
    ests, failures = [], {}
    for s in series_list:
        try:
            ests.append(fn(s))
        except (InsufficientData, ValueError) as exc:
            if isinstance(exc, HypothesisViolation):
                raise
            failures[s.seed] = str(exc)
    return ests, failures


def lyapunov_ensemble(series_list) -> AggregateEstimate:
    """Ball-return Lyapunov estimates over seeds, combined by harmonic mean.

    Each seed measures ``1/lambda`` (a slope); the slopes are averaged and the
    average inverted.  Seeds without an estimate are listed as failures.
    """
    ests, failures = _per_seed(series_list, lyapunov_from_ball_returns)
    return aggregate(ests, "ball-return", failures, harmonic=True)


def dimension_ensemble(series_list) -> AggregateEstimate:
    ests, failures = _per_seed(series_list, dimension_from_point_returns)
    return aggregate(ests, "point-return", failures)


def envelope_profile(series_list) -> dict:
    """Ensemble mean of ``tau(B_r)/(-log r)`` at each radius (unflagged rows only).

    Per seed the ratio at coarse radii is far below its limit ``1/lambda``
    because the set return counts any overlap; the ensemble mean at the
    finest radius is the usable finite-scale lower envelope.
    """
    acc = {}
    for s in series_list:
        for r in s.usable:
            acc.setdefault(r.scale, []).append(r.value / -math.log(r.scale))
    return {sc: float(np.mean(v)) for sc, v in sorted(acc.items(), reverse=True)}


# -- Hofbauer identity -------------------------------------------------------


@dataclass
class CrosscheckReport:
    entropy: float
    lyapunov: float
    dimension: float
    ratio: float
    discrepancy: float
    tolerance: float

    @property
    def within(self) -> bool:
        return abs(self.discrepancy) < self.tolerance

    def to_record(self) -> dict:
        return {
            "method": "hofbauer-crosscheck",
            "value": self.discrepancy,
            "entropy": self.entropy,
            "lyapunov": self.lyapunov,
            "dimension": self.dimension,
            "ratio": self.ratio,
            "tolerance": self.tolerance,
            "within": self.within,
        }


def _val(e) -> float:
    return float(e.value) if hasattr(e, "value") else float(e)


def hofbauer_crosscheck(h, lam, d, tolerance: float = 0.15) -> CrosscheckReport:
    """Compare a dimension estimate with entropy over Lyapunov exponent."""
    hv, lv, dv = _val(h), _val(lam), _val(d)
    if lv <= 0:
        raise ValueError(f"Lyapunov estimate must be positive, got {lv}")
    ratio = hv / lv
    return CrosscheckReport(hv, lv, dv, ratio, dv - ratio, tolerance)
