"""Symbolic coding of orbits and exact return times of cylinder sets.

The return time of a set ``A`` is ``min{k > 0 : T^k A ∩ A ≠ ∅}``.  For the
cylinder ``[w]`` of a word ``w`` of length ``n`` in the full shift this is the
smallest shift ``k`` under which ``w`` overlaps itself consistently, i.e. the
minimal period of ``w`` (it never exceeds ``n``).  It is *not* the first time
the coded point itself comes back, which is the repetition time computed in
:mod:`returntimes.recurrence`.

In a Markov shift a period ``k <= n`` only counts when the merged word
``w[:k] + w`` is admissible; if none qualifies, returns with ``k > n``
leave a gap of ``k - n`` free symbols between the two copies of ``w`` and are
reported separately (see :func:`cylinder_return_detail`).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import NoAdmissibleReturn
from .maps import IntervalMap, IntervalUnion, Orbit, image_of_union
from .series import ReturnSeries


def _as_array(word) -> np.ndarray:
    if isinstance(word, SymbolSequence):
        return word.symbols
    return np.asarray(word, dtype=np.int64).reshape(-1)


@dataclass(frozen=True)
class Partition:
    """Cells ``(0, c_1), (c_1, c_2), ..., (c_m, 1)`` labelled ``0..m``."""

    cut_points: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cut_points, dtype=float).reshape(-1)
        if c.size and (c[0] <= 0 or c[-1] >= 1 or np.any(np.diff(c) <= 0)):
            raise ValueError("cut points must be strictly increasing inside (0, 1)")
        object.__setattr__(self, "cut_points", c)

    @property
    def alphabet_size(self) -> int:
        return self.cut_points.size + 1

    @property
    def labels(self) -> range:
        return range(self.alphabet_size)

    def cell(self, x) -> np.ndarray | int:
        """Cell label(s) of ``x``; points on a cut go to the cell on the right."""
        return np.searchsorted(self.cut_points, x, side="right")


class DigitPartition:
    """Gauss cells ``(1/(k+1), 1/k)`` found from the digit ``floor(1/x)``.

    Same labelling and tie-break as :class:`Partition` with cuts ``1/k``
    (digit ``k`` gets label ``kmax - k``, a point on ``1/k`` goes right), but
    no cut array is stored, so ``kmax`` may be far beyond what fits in memory.
    Digits above ``kmax`` fall in the leftmost cell.
    """

    DENSE_LIMIT = 10**6

    def __init__(self, kmax: int):
        if kmax < 2:
            raise ValueError("need at least two cells")
        self.kmax = int(kmax)

    @property
    def alphabet_size(self) -> int:
        return self.kmax

    @property
    def labels(self) -> range:
        return range(self.kmax)

    @property
    def cut_points(self) -> np.ndarray:
        if self.kmax > self.DENSE_LIMIT:
            raise ValueError(f"{self.kmax} cells are too many to list")
        return 1.0 / np.arange(self.kmax, 1, -1, dtype=float)

    def cell(self, x):
        xa = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            y = 1.0 / xa
        k = np.floor(np.minimum(y, float(self.kmax)))
        k = np.where((k == y) & (k > 1), k - 1, k)
        lab = (self.kmax - k).astype(np.int64)
        return int(lab) if lab.ndim == 0 else lab

    def cell_exact(self, x: Fraction) -> int:
        if x == 0:
            return 0
        y = 1 / x
        k = y.numerator // y.denominator
        if k == y and k > 1:
            k -= 1
        return self.kmax - min(k, self.kmax)


def natural_partition(m: IntervalMap, max_branches: int | None = None):
    """Partition into the monotonicity intervals of ``m``.

    The Gauss family is countable; its partition is truncated at
    ``max_branches`` cells (by default the map's own truncation), the
    leftmost cell collecting all deeper digits.
    """
    if m.name == "gauss":
        return DigitPartition(max_branches or len(m.branches))
    return Partition([float(c) for c in m.cuts])


class SymbolSequence:
    """A finite word over ``{0, ..., alphabet_size - 1}``."""

    __slots__ = ("symbols", "alphabet_size", "source")

    def __init__(self, symbols, alphabet_size: int | None = None, source: str = ""):
        arr = np.asarray(symbols).reshape(-1)
        if arr.size and (arr.dtype.kind not in "iub"):
            if not np.all(arr == np.round(arr)):
                raise ValueError("symbols must be integers")
        arr = arr.astype(np.int64)
        if arr.size and arr.min() < 0:
            raise ValueError("symbols must be non-negative")
        top = int(arr.max()) + 1 if arr.size else 1
        if alphabet_size is None:
            alphabet_size = top
        elif top > alphabet_size:
            raise ValueError(f"symbol {top - 1} outside alphabet of size {alphabet_size}")
        dtype = np.uint8 if alphabet_size <= 256 else np.int64
        self.symbols = arr.astype(dtype)
        self.symbols.setflags(write=False)
        self.alphabet_size = int(alphabet_size)
        self.source = source

    def __len__(self):
        return self.symbols.size

    def __getitem__(self, item):
        if isinstance(item, slice):
            return SymbolSequence(self.symbols[item], self.alphabet_size, self.source)
        return int(self.symbols[item])

    def __iter__(self):
        return (int(s) for s in self.symbols)

    def __eq__(self, other):
        return np.array_equal(self.symbols, _as_array(other))

    def __repr__(self):
        head = " ".join(str(int(s)) for s in self.symbols[:20])
        more = " ..." if len(self) > 20 else ""
        return f"SymbolSequence('{head}{more}', alphabet_size={self.alphabet_size})"

    @classmethod
    def parse(cls, text: str, alphabet_size: int | None = None) -> "SymbolSequence":
        return cls([int(t) for t in text.split()], alphabet_size)

    def to_text(self) -> str:
        return " ".join(str(int(s)) for s in self.symbols)

    def compact(self) -> "SymbolSequence":
        """Relabel the observed symbols as ``0..k-1`` (order preserving)."""
        values, inv = np.unique(self.symbols, return_inverse=True)
        return SymbolSequence(inv, max(len(values), 1), self.source)


def write_words(path, words) -> Path:
    """Store words as whitespace-separated integers, one word per line."""
    path = Path(path)
    lines = [(w if isinstance(w, SymbolSequence) else SymbolSequence(w)).to_text() for w in words]
    path.write_text("".join(line + "\n" for line in lines))
    return path


def read_words(path, alphabet_size: int | None = None) -> list:
    return [SymbolSequence.parse(line, alphabet_size)
            for line in Path(path).read_text().splitlines() if line.strip()]


def encode_orbit(orb: Orbit, partition: Partition, compact: bool = False) -> SymbolSequence:
    """Code an orbit by the cells of ``partition``.

    ``compact=True`` relabels the observed symbols densely, which keeps the
    alphabet small for the truncated countable Gauss partition; return and
    repetition times only compare symbols, so they are unaffected.
    """
    if orb.generation_mode == "symbolic-exact" and isinstance(partition, DigitPartition):
        sym = np.array([partition.cell_exact(p) for p in orb.points], dtype=np.int64)
    elif orb.generation_mode == "symbolic-exact":
        # exact comparison against the cuts keeps the tie-break rule exact
        cuts = [Fraction(c).limit_denominator(1 << 32) for c in partition.cut_points]
        sym = np.array([bisect.bisect_right(cuts, p) for p in orb.points], dtype=np.int64)
    else:
        sym = partition.cell(np.asarray(orb.points, dtype=float))
    word = SymbolSequence(sym, partition.alphabet_size, source=f"orbit:{float(orb.seed)!r}")
    return word.compact() if compact else word


def generate_bernoulli_word(alphabet_size: int, probabilities, length: int,
                            rng_seed: int) -> SymbolSequence:
    """i.i.d. word with the given symbol probabilities.

    With ``(2, [1/2, 1/2])`` this is the exact symbolic model of the doubling
    map under Lebesgue measure.
    """
    p = np.asarray(probabilities, dtype=float)
    if p.shape != (alphabet_size,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise ValueError("probabilities must be a non-negative vector of length "
                         f"{alphabet_size} summing to 1")
    if length < 0:
        raise ValueError("length must be non-negative")
    rng = np.random.default_rng(rng_seed)
    if np.allclose(p, 1 / alphabet_size, rtol=0, atol=0) and alphabet_size <= 256:
        sym = rng.integers(0, alphabet_size, size=length, dtype=np.uint8)
    else:
        sym = rng.choice(alphabet_size, size=length, p=p)
    return SymbolSequence(sym, alphabet_size, source=f"bernoulli:{rng_seed}")


# -- transition structure ----------------------------------------------------


@dataclass(frozen=True)
class TransitionMatrix:
    """Allowed symbol transitions ``a -> b`` of a Markov shift."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError("transition matrix must be square and nonempty")
        if not a.any(axis=1).all() or not a.any(axis=0).all():
            raise ValueError("every symbol needs a successor and a predecessor")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def full(cls, size: int) -> "TransitionMatrix":
        return cls(np.ones((size, size), dtype=bool))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def is_full(self) -> bool:
        return bool(self.entries.all())

    def admissible(self, word) -> bool:
        w = _as_array(word)
        if w.size and w.max() >= self.size:
            return False
        return bool(np.all(self.entries[w[:-1], w[1:]]))

    def wielandt_bound(self) -> int:
        # any primitive s x s matrix has A^m > 0 for m >= (s-1)^2 + 1
        s = self.size
        return (s - 1) ** 2 + 1

    def primitivity_index(self) -> int | None:
        """Smallest ``m`` with ``A^m > 0``, or None when the shift is not mixing."""
        a = self.entries.astype(np.int64)
        p = a.copy()
        for m in range(1, self.wielandt_bound() + 1):
            if p.all():
                return m
            p = (p @ a > 0).astype(np.int64)
        return None


def transition_matrix(m: IntervalMap) -> TransitionMatrix:
    """Transition structure of a Markov map on its monotonicity partition.

    ``a -> b`` is allowed when the image of cell ``a`` covers cell ``b``.
    """
    if not m.markov:
        raise ValueError(f"{m.label} carries no Markov structure")
    n = m.n_branches
    a = np.zeros((n, n), dtype=bool)
    for i, br in enumerate(m.branches):
        lo, hi = br.domain
        img = image_of_union(m, IntervalUnion(((lo, hi),)))
        for j, other in enumerate(m.branches):
            c0, c1 = other.domain
            a[i, j] = any(s <= c0 and c1 <= e for s, e in img)
    return TransitionMatrix(a)


# -- cylinder return times ---------------------------------------------------


def failure_function(word) -> np.ndarray:
    """Border array: ``f[i]`` is the longest proper border of ``word[:i+1]``."""
    w = _as_array(word).tolist()
    n = len(w)
    f = [0] * n
    k = 0
    for i in range(1, n):
        c = w[i]
        while k and w[k] != c:
            k = f[k - 1]
        if w[k] == c:
            k += 1
        f[i] = k
    return np.asarray(f, dtype=np.int64)


def minimal_period(word) -> int:
    w = _as_array(word)
    if w.size == 0:
        raise ValueError("empty word")
    return int(w.size - failure_function(w)[-1])


class CylinderReturn(NamedTuple):
    time: int
    gapped: bool  # True when the return needs free symbols between the two copies


def _periods_from_borders(f, n):
    # all periods of a length-n word in increasing order, via its border chain
    b = int(f[n - 1])
    while True:
        yield n - b
        if b == 0:
            return
        b = int(f[b - 1])


def _gapped_return(w, adm: TransitionMatrix, n: int) -> int:
    last, first = int(w[-1]), int(w[0])
    a = adm.entries.astype(np.int64)
    p = a @ a
    for extra in range(1, adm.wielandt_bound() + 1):
        if p[last, first]:
            return n + extra
        p = (p @ a > 0).astype(np.int64)
    raise NoAdmissibleReturn(
        f"no admissible return of a length-{n} cylinder within {n + adm.wielandt_bound()} steps; "
        "the transition matrix is not mixing"
    )


def _check_admissibility(w, admissibility):
    if admissibility is None or (isinstance(admissibility, str) and admissibility == "full-shift"):
        return None
    adm = admissibility if isinstance(admissibility, TransitionMatrix) else TransitionMatrix(admissibility)
    if adm.is_full and (w.size == 0 or w.max() < adm.size):
        return None
    if not adm.admissible(w):
        raise ValueError("the word is not admissible, its cylinder is empty")
    return adm


def cylinder_return_detail(word, admissibility=None, _borders=None) -> CylinderReturn:
    """Return time of the cylinder ``[word]`` with an indication of gapped returns."""
    w = _as_array(word)
    n = w.size
    if n == 0:
        raise ValueError("cylinder word must be nonempty")
    adm = _check_admissibility(w, admissibility)
    f = failure_function(w) if _borders is None else _borders
    if adm is None:
        return CylinderReturn(int(n - f[n - 1]), False)
    first = int(w[0])
    for k in _periods_from_borders(f, n):
        if adm.entries[int(w[k - 1]), first]:
            return CylinderReturn(k, False)
    return CylinderReturn(_gapped_return(w, adm, n), True)


def cylinder_return_time(word, admissibility=None) -> int:
    """Poincaré return time of the cylinder set ``[word]``.

    Full shift (``admissibility`` None or ``"full-shift"``): the minimal
    period of the word, from its failure function in linear time.  With a
    :class:`TransitionMatrix` the smallest admissible self-overlap is used.

    >>> cylinder_return_time([0, 1, 0, 1])
    2
    >>> cylinder_return_time([0, 1, 1])
    3
    """
    return cylinder_return_detail(word, admissibility).time


def cylinder_return_time_bruteforce(word, admissibility=None) -> int:
    """Quadratic reference implementation of :func:`cylinder_return_time`."""
    w = [int(s) for s in _as_array(word)]
    n = len(w)
    if n == 0:
        raise ValueError("cylinder word must be nonempty")
    full = admissibility is None or (isinstance(admissibility, str) and admissibility == "full-shift")
    if not full:
        a = np.asarray(admissibility.entries if isinstance(admissibility, TransitionMatrix)
                       else admissibility, dtype=bool)

        def ok(u):
            return all(u[i] < len(a) and u[i + 1] < len(a) and a[u[i], u[i + 1]]
                       for i in range(len(u) - 1))

        if not ok(w):
            raise ValueError("the word is not admissible, its cylinder is empty")
    for k in range(1, n + 1):
        if all(w[i] == w[i + k] for i in range(n - k)):
            if full or ok(w[:k] + w):
                return k
    # returns beyond n: w, then `gap` free symbols, then w again
    s = len(a)
    bound = (s - 1) ** 2 + 1
    reach = {w[-1]}
    for gap in range(1, bound + 1):
        reach = {j for i in reach for j in range(s) if a[i, j]}
        if any(a[i, w[0]] for i in reach):
            return n + gap
    raise NoAdmissibleReturn("no admissible return within the mixing bound")


def return_ratio_series(word, n_values, admissibility=None) -> ReturnSeries:
    """Cylinder return times ``tau(word[:n])`` for each ``n`` in ``n_values``.

    The failure function of a prefix is the prefix of the failure function,
    so one linear pass serves every ``n``.
    """
    w = _as_array(word)
    ns = [int(n) for n in n_values]
    if ns and max(ns) > w.size:
        raise ValueError(f"word of length {w.size} is too short for n = {max(ns)}")
    f = failure_function(w[:max(ns)]) if ns else None
    rows = []
    for n in ns:
        rows.append((n, cylinder_return_detail(w[:n], admissibility, _borders=f[:n]).time, ""))
    src = word.source if isinstance(word, SymbolSequence) else ""
    return ReturnSeries("cylinder-return", rows, meta={"source": src})
