"""Metric recurrence: point returns, repetition times and ball set-returns.

Three different "return times" live here and must not be confused:

* ``point_return_time`` -- first ``k`` with ``d(T^k x, x) < r``;
* ``ball_set_return`` -- first ``k`` with ``T^k B ∩ B ≠ ∅`` for the ball
  ``B = B_r(x)``, computed by pushing ``B`` forward exactly as an interval union;
* ``repetition_time`` -- first reoccurrence of the initial ``n``-word of a
  coded orbit.

The set return never exceeds the point return of any point of the ball.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import (BranchTruncationError, BudgetExceeded, PieceCapExceeded,
                     ScanLimitExceeded)
from .maps import IntervalMap, IntervalUnion, Orbit, image_of_union, orbit
from .series import ReturnRow, ReturnSeries
from .symbolic import (SymbolSequence, _as_array, encode_orbit, natural_partition,
                       return_ratio_series, transition_matrix)

__all__ = [
    "PIECE_CAP", "ReturnSeries", "ReturnRow", "BallIterationState",
    "default_point_budget", "default_ball_budget", "point_return_time",
    "repetition_time", "repetition_series", "ball_set_return",
    "empirical_ball_measure", "scan_scales",
]

PIECE_CAP = 10**5
DEFAULT_SCAN_LIMIT = 10**7


def default_point_budget(r: float) -> int:
    """Ten times the typical return ``1/r`` with a logarithmic margin."""
    return math.ceil(10.0 / r * (1.0 + abs(math.log(r))))


def default_ball_budget(m: IntervalMap, r: float) -> int:
    if m.expansion and m.expansion > 1:
        return max(10, math.ceil(10.0 * -math.log(r) / math.log(m.expansion)))
    return default_point_budget(r)


def _advance(m: IntervalMap, x, n: int):
    # up to n forward points; stops early (returning the error) on truncation
    f = m.step or m
    out = []
    try:
        for _ in range(n):
            x = f(x)
            out.append(x)
    except BranchTruncationError as exc:
        return np.asarray(out, dtype=float), exc
    return np.asarray(out, dtype=float), None


def _first_hits(m: IntervalMap, x, radii, budgets):
    """Point return times for several radii from one progressively grown orbit.

    Returns a list of ``(value, flag)`` with flag ``""``, ``"budget"`` or
    ``"truncated"`` (the orbit left the materialized branches).
    """
    radii = [float(r) for r in radii]
    res = [None] * len(radii)
    if isinstance(x, Fraction):
        f = m.step or m
        y = x
        for k in range(1, max(budgets) + 1):
            y = f(y)
            d = m.distance(y, x)
            for i, r in enumerate(radii):
                if res[i] is None and k <= budgets[i] and d < r:
                    res[i] = (k, "")
            if all(v is not None for v in res):
                break
        return [v if v is not None else (budgets[i], "budget") for i, v in enumerate(res)]

    x0 = float(x)
    cur, done, chunk = x0, 0, 1024
    top = max(budgets)
    circle = m.metric == "circle"
    while done < top and any(v is None for v in res):
        pts, err = _advance(m, cur, min(chunk, top - done))
        d = np.abs(pts - x0)
        if circle:
            d = np.minimum(d, 1.0 - d)
        for i, r in enumerate(radii):
            if res[i] is None and done < budgets[i]:
                hit = np.flatnonzero(d[: budgets[i] - done] < r)
                if hit.size:
                    res[i] = (done + int(hit[0]) + 1, "")
        done += pts.size
        if err is not None:
            return [v if v is not None else (max(1, done), "truncated") for v in res]
        cur = float(pts[-1])
        chunk = min(chunk * 2, 1 << 20)
    return [v if v is not None else (budgets[i], "budget") for i, v in enumerate(res)]


def point_return_time(m: IntervalMap, x, r: float, budget: int | None = None) -> int:
    """First ``k > 0`` with ``d(T^k x, x) < r`` (circle metric for rotations).

    >>> from returntimes.maps import make_builtin_map
    >>> point_return_time(make_builtin_map("rotation", [0.25]), 0.0, 0.1, 10)
    4
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    budget = default_point_budget(r) if budget is None else int(budget)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    (value, flag), = _first_hits(m, x, [r], [budget])
    if flag == "budget":
        raise BudgetExceeded(f"no return within {budget} steps at r={r:g}", step=budget)
    if flag == "truncated":
        raise BranchTruncationError(f"orbit left the materialized branches after {value} steps")
    return value


# -- repetition times --------------------------------------------------------


def _find_prefix(w: np.ndarray, n: int, stop: int) -> int:
    """Smallest k >= 1 with w[k:k+n] == w[:n] and k + n <= stop, or -1."""
    if w.size == 0:
        return -1
    if int(w.max()) < 256:
        hay = w[:stop].astype(np.uint8).tobytes()
        return hay.find(hay[:n], 1)
    hay = w[:stop].astype(">u4").tobytes()
    needle = hay[: 4 * n]
    pos = hay.find(needle, 1)
    while pos != -1 and pos % 4:
        pos = hay.find(needle, pos + 1)
    return -1 if pos == -1 else pos // 4


def repetition_time(word, n: int, scan_limit: int | None = None) -> int:
    """First reoccurrence ``min{k >= 1 : word[k:k+n] == word[:n]}``.

    The search runs over ``word[1 : scan_limit + n]`` with the substring search
    of :meth:`bytes.find` (linear time).

    >>> repetition_time([0, 1, 0, 0, 1], 2)
    3
    """
    w = _as_array(word)
    if not 1 <= n <= w.size:
        raise ValueError(f"need 1 <= n <= {w.size}, got n={n}")
    stop = w.size if scan_limit is None else min(w.size, int(scan_limit) + n)
    k = _find_prefix(w, n, stop)
    if k < 0:
        raise ScanLimitExceeded(f"prefix of length {n} does not reoccur within {stop - n} shifts")
    return k


def repetition_series(word, n_values, scan_limit: int | None = None) -> ReturnSeries:
    """Repetition times for several prefix lengths; misses are flagged rows."""
    w = _as_array(word)
    rows = []
    for n in n_values:
        n = int(n)
        try:
            rows.append(ReturnRow(n, repetition_time(w, n, scan_limit)))
        except ScanLimitExceeded:
            scanned = (w.size if scan_limit is None else min(w.size, scan_limit + n)) - n
            rows.append(ReturnRow(n, max(1, scanned), "scan-limit"))
    return ReturnSeries("repetition", rows)


def _coded_prefix_times(m: IntervalMap, x, n_values, scan_limit: int):
    # grow the coded orbit until every prefix reoccurs or the scan limit is hit
    part = natural_partition(m)
    nmax = max(n_values)
    compact_needed = part.alphabet_size > 256
    length = max(4 * nmax, 4096)
    pts = np.array([float(x)])
    pending = {int(n) for n in n_values}
    found = {}
    truncated = False
    while True:
        want = min(length, scan_limit + nmax)
        if pts.size < want and not truncated:
            more, err = _advance(m, float(pts[-1]), want - pts.size)
            pts = np.concatenate([pts, more])
            truncated = err is not None
        word = part.cell(pts)
        if compact_needed:
            word = SymbolSequence(word, part.alphabet_size).compact().symbols
        for n in sorted(pending):
            if n > word.size:
                continue
            k = _find_prefix(np.asarray(word), n, word.size)
            if k > 0:
                found[n] = (k, "")
        pending -= set(found)
        if not pending or truncated or want >= scan_limit + nmax:
            break
        length *= 4
    scanned = max(1, pts.size - nmax)
    flag = "truncated" if truncated else "scan-limit"
    return {n: found.get(int(n), (scanned, flag)) for n in n_values}


# -- ball returns ------------------------------------------------------------


class BallIterationState:
    """Progress of the forward iteration of a ball (``T^step B``)."""

    __slots__ = ("current", "step", "budget")

    def __init__(self, current: IntervalUnion, budget: int, step: int = 0):
        if step > budget:
            raise ValueError("step beyond budget")
        self.current = current
        self.step = step
        self.budget = budget

    @property
    def piece_count(self) -> int:
        return len(self.current)

    def advance(self, m: IntervalMap) -> "BallIterationState":
        self.current = image_of_union(m, self.current)
        self.step += 1
        return self


def ball_set_return(m: IntervalMap, x, r: float, budget: int | None = None,
                    piece_cap: int = PIECE_CAP) -> int:
    """Set return time ``min{k > 0 : T^k B ∩ B ≠ ∅}`` of ``B = B_r(x)``.

    The ball is represented by its closed hull and iterated exactly as an
    interval union; intersection uses exact endpoint comparison.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    budget = default_ball_budget(m, r) if budget is None else int(budget)
    ball = IntervalUnion.ball(x, r, circle=m.metric == "circle")
    if ball.length == 0:
        raise ValueError("ball is degenerate")
    state = BallIterationState(ball, budget)
    while state.step < budget:
        state.advance(m)
        if state.piece_count > piece_cap:
            raise PieceCapExceeded(
                f"{state.piece_count} pieces after {state.step} steps (cap {piece_cap})",
                step=state.step, pieces=state.piece_count)
        if state.current.intersects(ball):
            return state.step
    raise BudgetExceeded(f"ball did not return within {budget} steps at r={r:g}", step=budget)


def empirical_ball_measure(orb: Orbit, x, r: float, metric: str = "flat") -> float:
    """Fraction of orbit points within distance ``r`` of ``x``."""
    if orb.length < 1:
        raise ValueError("empty orbit")
    pts = np.asarray(orb.points, dtype=float)
    d = np.abs(pts - float(x))
    if metric == "circle":
        d = np.minimum(d, 1.0 - d)
    return float(np.count_nonzero(d < r)) / orb.length


# -- scans -------------------------------------------------------------------


def _budgets(budgets, scales, default, budget_scale):
    if budgets is None:
        return [max(1, math.ceil(budget_scale * default(s))) for s in scales]
    if np.isscalar(budgets):
        return [int(budgets)] * len(scales)
    budgets = [int(b) for b in budgets]
    if len(budgets) != len(scales):
        raise ValueError("one budget per scale is required")
    return budgets


def scan_scales(kind: str, m: IntervalMap, x, scales, budgets=None, *,
                budget_scale: float = 1.0, seed: int | None = None,
                scan_limit: int = DEFAULT_SCAN_LIMIT,
                piece_cap: int = PIECE_CAP) -> ReturnSeries:
    """Evaluate one return quantity along a grid of scales.

    For ``"point-return"`` and ``"ball-set-return"`` the scales are radii
    (strictly decreasing); for ``"cylinder-return"`` and ``"repetition"`` they
    are word lengths of the coded orbit.  Failed rows are flagged, not dropped.
    """
    scales = list(scales)
    if not scales:
        raise ValueError("empty scale grid")
    meta = {"map": m.label, "zero_entropy": m.zero_entropy, "markov": m.markov}
    xf = float(x)

    if kind == "point-return":
        _check_radii(scales)
        b = _budgets(budgets, scales, default_point_budget, budget_scale)
        rows = [ReturnRow(s, v, f) for s, (v, f) in zip(scales, _first_hits(m, x, scales, b))]
    elif kind == "ball-set-return":
        _check_radii(scales)
        b = _budgets(budgets, scales, lambda r: default_ball_budget(m, r), budget_scale)
        rows = []
        for s, bud in zip(scales, b):
            try:
                rows.append(ReturnRow(s, ball_set_return(m, x, s, bud, piece_cap)))
            except BudgetExceeded:
                rows.append(ReturnRow(s, bud, "budget"))
            except PieceCapExceeded as exc:
                rows.append(ReturnRow(s, max(1, exc.step), "piece-cap"))
            except BranchTruncationError:
                rows.append(ReturnRow(s, 1, "truncated"))
    elif kind == "cylinder-return":
        ns = [int(n) for n in scales]
        word = _coded_word(m, x, max(ns))
        adm = transition_matrix(m) if m.markov else None
        if adm is not None and adm.is_full:
            adm = None
        rows = return_ratio_series(word, ns, adm).rows
    elif kind == "repetition":
        ns = [int(n) for n in scales]
        hits = _coded_prefix_times(m, x, ns, scan_limit)
        rows = [ReturnRow(n, *hits[n]) for n in ns]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return ReturnSeries(kind, rows, x=xf, seed=seed, meta=meta)


def _check_radii(scales):
    if any(s <= 0 for s in scales):
        raise ValueError("radii must be positive")
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("radii must be strictly decreasing")


def _coded_word(m: IntervalMap, x, length: int) -> SymbolSequence:
    return encode_orbit(orbit(m, x, length), natural_partition(m), compact=m.name == "gauss")
