"""Oracle-equivalence suites: every fast kernel against a slow, obvious one.

Each suite returns a :class:`SuiteResult`; ``run_all`` runs them in order.
``quick=True`` shrinks the sizes so the whole set finishes in a few seconds.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .complexity import lz76_parse, lz76_parse_naive
from .maps import make_builtin_map
from .recurrence import ball_set_return, point_return_time, repetition_time
from .symbolic import TransitionMatrix, cylinder_return_time, cylinder_return_time_bruteforce


@dataclass
class SuiteResult:
    name: str
    cases: int
    mismatches: list
    seconds: float

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f"; first mismatch {self.mismatches[0]}" if self.mismatches else ""
        return f"{status} {self.name}: {self.cases} cases in {self.seconds:.2f}s{extra}"


def _timed(name, fn):
    t0 = time.perf_counter()
    cases, bad = fn()
    return SuiteResult(name, cases, bad, time.perf_counter() - t0)


def cylinder_suite(max_binary: int = 14, n_ternary: int = 10_000, max_len: int = 200, seed: int = 0):
    """Failure-function cylinder return vs. the brute-force overlap scan."""

    def body():
        cases, bad = 0, []
        for n in range(1, max_binary + 1):
            for bits in itertools.product((0, 1), repeat=n):
                cases += 1
                if cylinder_return_time(bits) != cylinder_return_time_bruteforce(bits):
                    bad.append(bits)
        rng = np.random.default_rng(seed)
        for _ in range(n_ternary):
            w = rng.integers(0, 3, int(rng.integers(1, max_len + 1)))
            cases += 1
            if cylinder_return_time(w) != cylinder_return_time_bruteforce(w):
                bad.append(tuple(w))
        # golden-mean shift: no "1 1"
        adm = TransitionMatrix([[1, 1], [1, 0]])
        for n in range(1, min(max_binary, 12) + 1):
            for bits in itertools.product((0, 1), repeat=n):
                if not adm.admissible(bits):
                    continue
                cases += 1
                if cylinder_return_time(bits, adm) != cylinder_return_time_bruteforce(bits, adm):
                    bad.append(("markov",) + bits)
        return cases, bad

    return _timed("cylinder-return", body)


def lz76_suite(n_words: int = 300, max_len: int = 400, seed: int = 1):
    """Suffix-array LZ76 parse vs. the quadratic definition."""

    def body():
        rng = np.random.default_rng(seed)
        bad = []
        for i in range(n_words):
            k = int(rng.integers(1, 5))
            w = rng.integers(0, k, int(rng.integers(1, max_len + 1)))
            if i % 3 == 0:
                w = np.resize(w[: max(1, w.size // 7)], w.size)
            if lz76_parse(w).phrases != lz76_parse_naive(w).phrases:
                bad.append(tuple(w))
        return n_words, bad

    return _timed("lz76-parse", body)


def repetition_suite(n_words: int = 500, seed: int = 2):
    """``bytes.find`` repetition time vs. a direct shift-by-shift comparison."""

    def body():
        rng = np.random.default_rng(seed)
        bad, cases = [], 0
        for _ in range(n_words):
            w = rng.integers(0, int(rng.integers(1, 4)), int(rng.integers(2, 300)))
            for n in (1, 2, 3, 5, 8):
                if n >= w.size:
                    continue
                ref = next((k for k in range(1, w.size - n + 1)
                            if np.array_equal(w[k:k + n], w[:n])), None)
                cases += 1
                try:
                    got = repetition_time(w, n)
                except Exception:
                    got = None
                if got != ref:
                    bad.append((tuple(w), n))
        return cases, bad

    return _timed("repetition-time", body)


def point_return_suite(n_points: int = 50, seed: int = 3):
    """Chunked point return vs. a step-by-step scan of the orbit."""

    def body():
        rng = np.random.default_rng(seed)
        bad, cases = [], 0
        for name in ("tripling", "logistic", "gauss", "rotation"):
            m = make_builtin_map(name)
            for _ in range(n_points):
                x = float(rng.uniform(0.05, 0.95))
                r = float(10 ** rng.uniform(-3, -1))
                y, ref = x, None
                for k in range(1, 200_001):
                    y = m.step(y)
                    if m.distance(y, x) < r:
                        ref = k
                        break
                cases += 1
                try:
                    got = point_return_time(m, x, r, 200_000)
                except Exception:
                    got = None
                if got != ref:
                    bad.append((name, x, r))
        return cases, bad

    return _timed("point-return", body)


def ball_return_suite(samples: int = 10_000, seed: int = 4):
    """Exact interval-union ball return vs. a dense grid of sample points."""

    def body():
        m = make_builtin_map("tripling")
        rng = np.random.default_rng(seed)
        centres = [0.5, 0.33] + [float(v) for v in rng.uniform(0.01, 0.99, 6)]
        bad = []
        r = 1e-3
        for x in centres:
            exact = ball_set_return(m, x, r, 50)
            pts = np.linspace(x - r, x + r, samples)
            pts = pts[(pts >= 0) & (pts <= 1)]
            grid = None
            for k in range(1, 51):
                pts = 3.0 * pts % 1.0
                if np.any(np.abs(pts - x) <= r):
                    grid = k
                    break
            # the grid can only find returns the exact union also sees
            if grid is None or exact != grid:
                bad.append((x, exact, grid))
        return len(centres), bad

    return _timed("ball-set-return", body)


def run_all(quick: bool = False) -> list:
    if quick:
        return [cylinder_suite(10, 1000, 60), lz76_suite(60, 200), repetition_suite(100),
                point_return_suite(10), ball_return_suite(2000)]
    return [cylinder_suite(), lz76_suite(), repetition_suite(), point_return_suite(),
            ball_return_suite()]
