"""Tables of (scale, return value) pairs and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

KINDS = ("point-return", "ball-set-return", "cylinder-return", "repetition")
# kinds whose scale is a word length rather than a radius
INTEGER_SCALE_KINDS = ("cylinder-return", "repetition")

CSV_HEADER = ("kind", "seed", "x", "scale", "value", "flag")


class ReturnRow(NamedTuple):
    scale: float
    value: int
    flag: str = ""

    @property
    def ok(self) -> bool:
        return not self.flag


@dataclass
class ReturnSeries:
    """Return quantities sampled along a grid of scales.

    Flagged rows (budget exceeded, piece cap, truncation, ...) stay in the
    table so that nothing is dropped silently; their ``value`` is the step
    reached, i.e. a lower bound.  Estimators use only unflagged rows.
    """

    kind: str
    rows: list = field(default_factory=list)
    x: float | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown series kind {self.kind!r}")
        self.rows = [ReturnRow(*r) for r in self.rows]
        scales = [r.scale for r in self.rows]
        if len(scales) > 1:
            diffs = [b - a for a, b in zip(scales, scales[1:])]
            if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
                raise ValueError("scales must be strictly monotone")
        if any(r.value < 1 for r in self.rows):
            raise ValueError("return values are at least 1")

    def __len__(self):
        return len(self.rows)

    @property
    def usable(self) -> list:
        return [r for r in self.rows if r.ok]

    @property
    def scales(self) -> list:
        return [r.scale for r in self.rows]

    @property
    def values(self) -> list:
        return [r.value for r in self.rows]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def series_to_csv(series) -> str:
    """Render one or more series as CSV text (header always present)."""
    if isinstance(series, ReturnSeries):
        series = [series]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in series:
        for r in s.rows:
            scale = int(r.scale) if s.kind in INTEGER_SCALE_KINDS else r.scale
            w.writerow([s.kind, _fmt(s.seed), _fmt(s.x), _fmt(scale), str(int(r.value)), r.flag])
    return buf.getvalue()


def emit_csv(series, path) -> Path:
    """Write ``series`` (one or many) to ``path`` with header ``kind,seed,x,scale,value,flag``."""
    path = Path(path)
    path.write_text(series_to_csv(series))
    return path


def read_csv(path) -> list:
    """Parse a file written by :func:`emit_csv` back into series.

    Rows are grouped by ``(kind, seed, x)`` in order of first appearance.
    """
    text = Path(path).read_text()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise ValueError(f"{path}: not a return-series CSV (header {header!r})")
    groups = {}
    for kind, seed, x, scale, value, flag in reader:
        key = (kind, seed, x)
        if key not in groups:
            groups[key] = ReturnSeries(
                kind,
                x=float(x) if x else None,
                seed=int(seed) if seed else None,
            )
        sc = int(scale) if kind in INTEGER_SCALE_KINDS else float(scale)
        groups[key].rows.append(ReturnRow(sc, int(value), flag))
    out = []
    for s in groups.values():
        out.append(ReturnSeries(s.kind, s.rows, s.x, s.seed))
    return out
