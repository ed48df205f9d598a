"""Piecewise-monotonic maps of the unit interval.

A map is an ordered family of monotone branches living on open
subintervals whose closures cover [0, 1].  A point lying exactly on a
boundary shared by two branches belongs to the branch on its right; the
point 1 belongs to the last branch.

Two arithmetic modes are supported.  Floating mode works on Python floats.
Exact mode works on :class:`fractions.Fraction` values and is available for
the affine families with rational parameters (tripling, doubling, tent and
rotations by a rational angle).  The doubling map runs *only* in exact mode:
in binary floating point every doubling orbit reaches 0 within about 53
steps.  The tripling map is the floating-point expanding Markov workhorse;
its rounding errors behave like a small amount of benign noise.

Floating error model: each floating step carries a relative rounding error
of at most a few ulps (``FLOAT_STEP_ERROR``).  Chaotic maps amplify it, so a
floating orbit is a pseudo-orbit that shadows a true orbit rather than the
true orbit of its stored seed.
"""

from __future__ import annotations

import bisect
import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import BranchTruncationError, CriticalPointError

GAUSS_MAX_BRANCHES = 10**6
FLOAT_STEP_ERROR = 4 * np.finfo(float).eps
BURN_IN_STEPS = 10_000
# Parameter value where the period-doubling cascade of x -> ax(1-x) accumulates.
FEIGENBAUM_POINT = 3.5699456718709449

_ONE_BELOW = math.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class Branch:
    """One monotone piece of an interval map.

    ``forward`` and ``derivative`` are evaluated on the closure of
    ``domain`` and are written with plain arithmetic so that they accept
    floats, fractions and numpy arrays alike.
    """

    domain: tuple
    forward: Callable
    derivative: Callable
    increasing: bool = True

    @property
    def monotone_direction(self) -> str:
        return "increasing" if self.increasing else "decreasing"

    def image(self, lo, hi):
        """Endpoints of the image of ``[lo, hi]`` (a piece of the domain closure)."""
        a, b = self.forward(lo), self.forward(hi)
        return (a, b) if self.increasing else (b, a)


class _GaussBranches(Sequence):
    # Branches of 1/x mod 1, built on demand.  Index i holds digit k = i + 1
    # on the interval (1/(k+1), 1/k), so the sequence runs right to left.

    def __init__(self, max_branches: int):
        self._n = max_branches

    def __len__(self):
        return self._n

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(self._n))]
        if i < 0:
            i += self._n
        if not 0 <= i < self._n:
            raise IndexError(i)
        k = i + 1
        return Branch(
            domain=(Fraction(1, k + 1), Fraction(1, k)),
            forward=lambda x, k=k: 1 / x - k,
            derivative=lambda x: -1 / (x * x),
            increasing=False,
        )


@dataclass(frozen=True, eq=False)
class IntervalMap:
    """A piecewise-monotonic self-map of [0, 1].

    Parameters
    ----------
    name, params
        Family identifier and its parameters.
    branches
        Monotone branches.  For finite families they are ordered left to
        right; countable families supply a ``locator``.
    markov
        True when the branch images are unions of partition cells (a
        transition structure can be derived from the branches).
    invariant_measure_id
        Tag of the sampler for the invariant measure (``"lebesgue"``,
        ``"arcsine"``, ``"gauss"``, ``"burn-in"``) or None.
    metric
        ``"flat"`` for ``|x - y|`` or ``"circle"`` for the circle distance.
    zero_entropy
        Marks families whose invariant measure has zero metric entropy.
    exact_only
        Refuse floating arithmetic (doubling).
    full_branches
        Every branch maps its domain onto (0, 1).
    expansion
        Lower bound on ``|T'|`` when the map is uniformly expanding.
    step, dstep
        Optional fast paths for one iteration and for a vectorised derivative.
        ``step`` must agree with the branch rule, boundary tie-break included.
    locator
        Optional ``x -> branch index`` for countable families.
    """

    name: str
    branches: Sequence[Branch]
    markov: bool = False
    invariant_measure_id: str | None = None
    params: tuple = ()
    metric: str = "flat"
    zero_entropy: bool = False
    exact_only: bool = False
    full_branches: bool = False
    expansion: float | None = None
    step: Callable | None = field(default=None, repr=False)
    dstep: Callable | None = field(default=None, repr=False)
    locator: Callable | None = field(default=None, repr=False)
    span: Callable | None = field(default=None, repr=False)
    cuts: tuple = field(init=False, repr=False)
    _fcuts: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.metric not in ("flat", "circle"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.locator is not None:
            object.__setattr__(self, "cuts", ())
            object.__setattr__(self, "_fcuts", ())
            return
        doms = [b.domain for b in self.branches]
        if not doms:
            raise ValueError("a map needs at least one branch")
        if doms[0][0] != 0 or doms[-1][1] != 1:
            raise ValueError("branch domains must cover [0, 1]")
        for (lo, hi), nxt in zip(doms, doms[1:] + [None]):
            if not lo < hi:
                raise ValueError(f"empty branch domain ({lo}, {hi})")
            if nxt is not None and hi != nxt[0]:
                raise ValueError("branch domains must be contiguous and ordered")
        cuts = tuple(d[1] for d in doms[:-1])
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "_fcuts", tuple(float(c) for c in cuts))

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}({', '.join(str(p) for p in self.params)})"

    def branch_index(self, x) -> int:
        """Index of the branch owning ``x`` (right tie-break)."""
        if self.locator is not None:
            return self.locator(x)
        cuts = self.cuts if isinstance(x, Fraction) else self._fcuts
        return bisect.bisect_right(cuts, x)

    def branch_indices(self, a, b) -> range:
        """Indices of branches whose domain overlaps ``[a, b]`` in positive length."""
        if self.span is not None:
            return self.span(a, b)
        cuts = self.cuts if isinstance(a, Fraction) and isinstance(b, Fraction) else self._fcuts
        return range(bisect.bisect_right(cuts, a), bisect.bisect_left(cuts, b) + 1)

    def __call__(self, x):
        if self.step is not None:
            return self.step(x)
        return self.branches[self.branch_index(x)].forward(x)

    def derivative(self, x):
        return self.branches[self.branch_index(x)].derivative(x)

    def distance(self, x, y):
        d = abs(x - y)
        if self.metric == "circle":
            return min(d, 1 - d)
        return d


# -- built-in families ------------------------------------------------------


def _affine_branches(n):
    # n full increasing branches x -> n x - k
    return [
        Branch(
            domain=(Fraction(k, n), Fraction(k + 1, n)),
            forward=lambda x, k=k, n=n: n * x - k,
            derivative=lambda x, n=n: n + 0 * x,
        )
        for k in range(n)
    ]


def _tripling_step(x):
    y = 3 * x
    k = int(y)
    if k == 3:
        k = 2
    return y - k


def _doubling_step(x):
    y = 2 * x
    k = int(y)
    if k == 2:
        k = 1
    return y - k


def _tent_step(x):
    return 2 * x if x < 0.5 else 2 - 2 * x


def _make_tripling():
    return IntervalMap(
        name="tripling",
        branches=_affine_branches(3),
        markov=True,
        invariant_measure_id="lebesgue",
        full_branches=True,
        expansion=3.0,
        step=_tripling_step,
        dstep=lambda x: np.full(np.shape(x), 3.0),
    )


def _make_doubling():
    return IntervalMap(
        name="doubling",
        branches=_affine_branches(2),
        markov=True,
        invariant_measure_id="lebesgue",
        exact_only=True,
        full_branches=True,
        expansion=2.0,
        step=_doubling_step,
        dstep=lambda x: np.full(np.shape(x), 2.0),
    )


def _make_tent():
    half = Fraction(1, 2)
    return IntervalMap(
        name="tent",
        branches=[
            Branch((Fraction(0), half), lambda x: 2 * x, lambda x: 2 + 0 * x),
            Branch((half, Fraction(1)), lambda x: 2 - 2 * x, lambda x: -2 + 0 * x, increasing=False),
        ],
        markov=True,
        invariant_measure_id="lebesgue",
        full_branches=True,
        expansion=2.0,
        step=_tent_step,
        dstep=lambda x: np.where(np.asarray(x) < 0.5, 2.0, -2.0),
    )


def _make_logistic(a):
    a = float(a)
    if not 0 < a <= 4:
        raise ValueError(f"logistic parameter must lie in (0, 4], got {a}")
    top = a == 4.0

    def step(x):
        y = a * x * (1 - x)
        # 4x(1-x) rounds to exactly 1 in a window of width ~1e-8 around 1/2,
        # after which the float orbit would sit on the fixed point 0 forever.
        if top and y >= 1.0 and x != 0.5:
            return _ONE_BELOW
        return y

    def fwd(x):
        return step(x) if isinstance(x, float) else a * x * (1 - x)

    return IntervalMap(
        name="logistic",
        params=(a,),
        branches=[
            Branch((0.0, 0.5), fwd, lambda x: a * (1 - 2 * x)),
            Branch((0.5, 1.0), fwd, lambda x: a * (1 - 2 * x), increasing=False),
        ],
        markov=top,
        invariant_measure_id="arcsine" if top else "burn-in",
        zero_entropy=a <= FEIGENBAUM_POINT,
        full_branches=top,
        step=step,
        dstep=lambda x: a * (1 - 2 * np.asarray(x, dtype=float)),
    )


def _make_gauss(max_branches=GAUSS_MAX_BRANCHES):
    max_branches = int(max_branches)
    if max_branches < 2:
        raise ValueError("gauss map needs at least 2 branches")
    limit = 1.0 / (max_branches + 1)

    def digit(x):
        if x <= limit:
            raise BranchTruncationError(
                f"point {float(x):.3g} lies beyond the {max_branches} materialized Gauss branches"
            )
        y = 1 / x
        k = math.floor(y)
        if k == y and k > 1:
            k -= 1
        return k, y

    def step(x):
        k, y = digit(x)
        return y - k

    def locator(x):
        return digit(x)[0] - 1

    def span(a, b):
        if a <= limit:
            raise BranchTruncationError(
                f"interval reaches {float(a):.3g}, beyond the materialized Gauss branches"
            )
        kmin = max(1, math.floor(1 / b))
        kmax = math.ceil(1 / a) - 1
        return range(kmin - 1, kmax)

    return IntervalMap(
        name="gauss",
        params=(max_branches,) if max_branches != GAUSS_MAX_BRANCHES else (),
        branches=_GaussBranches(max_branches),
        invariant_measure_id="gauss",
        full_branches=True,
        step=step,
        dstep=lambda x: -1.0 / np.square(np.asarray(x, dtype=float)),
        locator=locator,
        span=span,
    )


def _make_rotation(alpha):
    if not isinstance(alpha, Fraction):
        alpha = float(alpha)
    if not 0 < alpha < 1:
        raise ValueError(f"rotation angle must lie in (0, 1), got {alpha}")
    cut = 1 - alpha

    def step(x):
        y = x + alpha
        return y - 1 if y >= 1 else y

    return IntervalMap(
        name="rotation",
        params=(alpha,),
        branches=[
            Branch((0 * cut, cut), lambda x: x + alpha, lambda x: 1 + 0 * x),
            Branch((cut, 1 + 0 * cut), lambda x: x + alpha - 1, lambda x: 1 + 0 * x),
        ],
        invariant_measure_id="lebesgue",
        metric="circle",
        zero_entropy=True,
        expansion=1.0,
        step=step,
        dstep=lambda x: np.ones(np.shape(x)),
    )


def _manneville_cut(s):
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid + mid ** (1 + s) < 1:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _make_manneville_pomeau(s):
    s = float(s)
    if not s > 0:
        raise ValueError(f"Manneville-Pomeau exponent must be positive, got {s}")
    cut = _manneville_cut(s)

    def step(x):
        y = x + x ** (1 + s)
        return y - 1 if y >= 1 else y

    def deriv(x):
        return 1 + (1 + s) * x**s

    return IntervalMap(
        name="manneville-pomeau",
        params=(s,),
        branches=[
            Branch((0.0, cut), lambda x: x + x ** (1 + s), deriv),
            Branch((cut, 1.0), lambda x: x + x ** (1 + s) - 1, deriv),
        ],
        # the acip is a probability measure only for s < 1
        invariant_measure_id="burn-in" if s < 1 else None,
        step=step,
        dstep=lambda x: deriv(np.asarray(x, dtype=float)),
    )


_BUILTINS = {
    "tripling": (_make_tripling, 0, 0),
    "doubling": (_make_doubling, 0, 0),
    "tent": (_make_tent, 0, 0),
    "logistic": (_make_logistic, 0, 1),
    "gauss": (_make_gauss, 0, 1),
    "rotation": (_make_rotation, 1, 1),
    "manneville-pomeau": (_make_manneville_pomeau, 1, 1),
}

BUILTIN_DEFAULTS = {"logistic": (4.0,), "rotation": ((math.sqrt(5) - 1) / 2,), "manneville-pomeau": (0.5,)}


def builtin_names():
    return list(_BUILTINS)


def make_builtin_map(name: str, params=()) -> IntervalMap:
    """Instantiate a built-in family.

    >>> make_builtin_map("tripling").n_branches
    3
    >>> make_builtin_map("logistic", [4]).markov
    True
    """
    key = name.lower().replace("_", "-")
    if key in ("manneville", "pomeau", "mp"):
        key = "manneville-pomeau"
    if key not in _BUILTINS:
        raise ValueError(f"unknown map {name!r}; choose from {', '.join(_BUILTINS)}")
    factory, lo, hi = _BUILTINS[key]
    params = list(params or ())
    if not params and key in BUILTIN_DEFAULTS:
        params = list(BUILTIN_DEFAULTS[key])
    if not lo <= len(params) <= hi:
        raise ValueError(f"map {key!r} takes between {lo} and {hi} parameters, got {len(params)}")
    return factory(*params)


def parse_map_spec(spec: str) -> IntervalMap:
    """Build a map from ``"name"`` or ``"name:p1,p2"`` (e.g. ``"logistic:4"``)."""
    name, _, rest = spec.partition(":")
    params = []
    for tok in filter(None, (t.strip() for t in rest.split(","))):
        params.append(Fraction(tok) if "/" in tok else float(tok))
    return make_builtin_map(name.strip(), params)


# -- iteration ---------------------------------------------------------------


def _check_point(m: IntervalMap, x):
    if not 0 <= x <= 1:
        raise ValueError(f"point {x} outside [0, 1]")
    if m.exact_only and not isinstance(x, Fraction):
        raise ValueError(
            f"the {m.name} map runs only in exact mode; pass a fractions.Fraction "
            "seed or use a Bernoulli word as its symbolic model"
        )


def iterate(m: IntervalMap, x, n: int):
    """Return ``T^n x``.  Fractions are iterated exactly, floats in floating point."""
    _check_point(m, x)
    if n < 0:
        raise ValueError("n must be non-negative")
    f = m.step or m
    for _ in range(n):
        x = f(x)
    return x


def forward_points(m: IntervalMap, x, n: int) -> np.ndarray:
    """Float array ``[T x, T^2 x, ..., T^n x]`` (the seed excluded)."""
    f = m.step or m
    out = [0.0] * n
    for i in range(n):
        x = f(x)
        out[i] = x
    return np.asarray(out, dtype=float)


@dataclass(frozen=True)
class Orbit:
    """An orbit segment ``x, T x, ..., T^{length-1} x``."""

    points: object
    seed: object
    length: int
    generation_mode: str = "floating"

    def __post_init__(self):
        if len(self.points) != self.length:
            raise ValueError("orbit length does not match its points")
        if self.length and self.points[0] != self.seed:
            raise ValueError("orbit must start at its seed")
        if self.generation_mode not in ("floating", "symbolic-exact"):
            raise ValueError(f"unknown generation mode {self.generation_mode!r}")

    def __len__(self):
        return self.length


def orbit(m: IntervalMap, x, length: int) -> Orbit:
    """Orbit segment of ``length`` points starting at ``x``.

    A :class:`~fractions.Fraction` seed selects exact (symbolic) mode and the
    points are kept as fractions; otherwise the points form a float array.
    """
    _check_point(m, x)
    if length < 1:
        raise ValueError("orbit length must be at least 1")
    if isinstance(x, Fraction):
        pts = [x]
        f = m.step or m
        for _ in range(length - 1):
            pts.append(f(pts[-1]))
        return Orbit(pts, x, length, "symbolic-exact")
    if m.name in ("tent",) and length > 60:
        warnings.warn(
            "floating tent orbits collapse onto 0 after ~53 steps; use a Fraction seed",
            RuntimeWarning,
            stacklevel=2,
        )
    x = float(x)
    pts = np.empty(length)
    pts[0] = x
    if length > 1:
        pts[1:] = forward_points(m, x, length - 1)
    return Orbit(pts, x, length, "floating")


def log_derivative_sum(m: IntervalMap, x, n: int) -> float:
    """Birkhoff sum ``sum_{i<n} log|T'(T^i x)|``.

    Raises :class:`CriticalPointError` when the derivative vanishes (or is
    not finite) somewhere along the orbit segment.
    """
    _check_point(m, x)
    if n < 0:
        raise ValueError("n must be non-negative")
    if isinstance(x, Fraction) or m.dstep is None:
        total = 0.0
        f = m.step or m
        for _ in range(n):
            d = abs(float(m.derivative(x)))
            if d == 0 or not math.isfinite(d):
                raise CriticalPointError(f"derivative {d} at orbit point {float(x)!r}")
            total += math.log(d)
            x = f(x)
        return total
    total = 0.0
    chunk = 1 << 18
    x = float(x)
    done = 0
    while done < n:
        k = min(chunk, n - done)
        pts = np.empty(k)
        pts[0] = x
        if k > 1:
            pts[1:] = forward_points(m, x, k - 1)
        d = np.abs(m.dstep(pts))
        if not np.all(np.isfinite(d)) or np.any(d == 0):
            bad = pts[np.flatnonzero((d == 0) | ~np.isfinite(d))[0]]
            raise CriticalPointError(f"derivative vanishes or is undefined at orbit point {bad!r}")
        total += float(np.sum(np.log(d)))
        done += k
        if done < n:
            x = (m.step or m)(pts[-1])
    return total


# -- invariant measures ------------------------------------------------------


def _lebesgue(u):
    return u


def _arcsine(u):
    return math.sin(math.pi * u / 2) ** 2


def _gauss_density_inverse(u):
    return 2.0**u - 1.0


_SAMPLERS = {"lebesgue": _lebesgue, "arcsine": _arcsine, "gauss": _gauss_density_inverse}


def sample_initial_point(m: IntervalMap, rng_seed: int, exact_bits: int | None = None):
    """Draw a point distributed according to the map's invariant measure.

    ``exact_bits`` (Lebesgue maps only) returns a uniformly random dyadic
    :class:`~fractions.Fraction` with that many binary digits, which keeps an
    exact orbit of the doubling or tent map non-degenerate for as many steps.
    """
    mid = m.invariant_measure_id
    if mid is None:
        raise ValueError(f"no invariant-measure sampler registered for {m.label}")
    rng = np.random.default_rng(rng_seed)
    if exact_bits is not None:
        if mid != "lebesgue":
            raise ValueError("exact seeds are only available for Lebesgue-invariant maps")
        nbytes = (exact_bits + 7) // 8
        num = int.from_bytes(rng.bytes(nbytes), "big") >> (8 * nbytes - exact_bits)
        return Fraction(num, 1 << exact_bits)
    u = float(rng.random())
    if mid == "burn-in":
        return iterate(m, u, BURN_IN_STEPS)
    return _SAMPLERS[mid](u)


def sample_initial_points(m: IntervalMap, rng_seeds) -> list:
    return [sample_initial_point(m, s) for s in rng_seeds]


# -- interval unions ---------------------------------------------------------


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise-disjoint closed subintervals of [0, 1]."""

    intervals: tuple = ()

    def __post_init__(self):
        ivs = tuple((a, b) for a, b in self.intervals)
        prev = None
        for a, b in ivs:
            if not 0 <= a <= b <= 1:
                raise ValueError(f"bad interval [{a}, {b}]")
            if prev is not None and not prev < a:
                raise ValueError("intervals must be sorted and disjoint")
            prev = b
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def from_pieces(cls, pieces) -> "IntervalUnion":
        """Merge arbitrary closed pieces (clipped to [0, 1]) into a union."""
        ivs = sorted((max(a, 0), min(b, 1)) for a, b in pieces if min(b, 1) >= max(a, 0))
        merged = []
        for a, b in ivs:
            if merged and a <= merged[-1][1]:
                if b > merged[-1][1]:
                    merged[-1] = (merged[-1][0], b)
            else:
                merged.append((a, b))
        return cls(tuple(merged))

    @classmethod
    def full(cls) -> "IntervalUnion":
        return cls(((0.0, 1.0),))

    @classmethod
    def ball(cls, x, r, circle: bool = False) -> "IntervalUnion":
        """Closed hull of the ball of radius ``r`` about ``x``, intersected with [0, 1]."""
        if circle:
            if r >= 0.5:
                return cls.full()
            lo, hi = x - r, x + r
            pieces = [(max(lo, 0), min(hi, 1))]
            if lo < 0:
                pieces.append((lo + 1, 1))
            if hi > 1:
                pieces.append((0, hi - 1))
            return cls.from_pieces(pieces)
        return cls.from_pieces([(x - r, x + r)])

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def length(self):
        return sum(b - a for a, b in self.intervals)

    def intersects(self, other: "IntervalUnion") -> bool:
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            if a[i][0] <= b[j][1] and b[j][0] <= a[i][1]:
                return True
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return False

    def contains(self, x) -> bool:
        return any(a <= x <= b for a, b in self.intervals)


def image_of_union(m: IntervalMap, u: IntervalUnion) -> IntervalUnion:
    """Exact forward image ``T(u)``.

    Every interval is split at the branch boundaries, each piece is mapped
    endpoint to endpoint by its branch (evaluated on the branch closure) and
    the images are merged.
    """
    pieces = []
    for a, b in u:
        if a == b:
            br = m.branches[m.branch_index(a)]
            y = br.forward(a)
            pieces.append((y, y))
            continue
        if m.name == "gauss" and a == 0:
            # [0, b] holds infinitely many complete branches
            return IntervalUnion.full()
        idx = m.branch_indices(a, b)
        if m.full_branches and len(idx) > 2:
            return IntervalUnion.full()
        exact = isinstance(a, Fraction) and isinstance(b, Fraction)
        for j in idx:
            br = m.branches[j]
            d0, d1 = br.domain if exact else (float(br.domain[0]), float(br.domain[1]))
            lo, hi = max(a, d0), min(b, d1)
            if lo >= hi:
                continue
            if m.full_branches and lo == d0 and hi == d1:
                return IntervalUnion.full()
            pieces.append(br.image(lo, hi))
    return IntervalUnion.from_pieces(pieces)
