"""Dataset generators, CSV formats, and loaders.

Formats (UTF-8, LF, '.' decimal separator, 17 significant digits):
  segments:        header ``d,a1..ad,b1..bd``; one segment per line as its
                   two endpoints.
  motion vectors:  header ``frame,x1,y1,x2,y2``; frames non-decreasing.
  weighted points: header ``d,x1..xd,weight``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError, ParseError
from .geometry import Segment, WeightedPointSet

__all__ = [
    "MotionVectorRecord",
    "gen_synthetic",
    "sample_by_length",
    "save_segments_csv",
    "load_segments_csv",
    "save_motion_vectors",
    "load_motion_vectors",
    "save_weighted_points_csv",
    "load_weighted_points_csv",
    "load_roads_fixture",
]


@dataclass(frozen=True)
class MotionVectorRecord:
    """One block displacement: source (x1, y1) to destination (x2, y2)."""

    frame: int
    x1: float
    y1: float
    x2: float
    y2: float

    def as_segment(self) -> Segment:
        return Segment.from_endpoints((self.x1, self.y1), (self.x2, self.y2))


def gen_synthetic(n: int, d: int, seed: int) -> list[Segment]:
    """n segments whose endpoints are i.i.d. uniform on [-1, 1]^d."""
    if n < 1 or d < 1:
        raise InvalidParameterError("n and d must be positive")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=(n, d))
    b = rng.uniform(-1.0, 1.0, size=(n, d))
    return [Segment.from_endpoints(a[i], b[i]) for i in range(n)]


def sample_by_length(L: Sequence[Segment], m: int, seed: int) -> list[Segment]:
    """m i.i.d. draws from L with probability proportional to segment length."""
    lengths = np.array([s.length for s in L])
    total = lengths.sum()
    if total <= 0.0:
        raise InvalidParameterError("need at least one segment of positive length")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(L), size=m, replace=True, p=lengths / total)
    return [L[i] for i in idx]


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _parse_floats(fields: list[str], line: int) -> list[float]:
    out = []
    for f in fields:
        try:
            v = float(f)
        except ValueError:
            raise ParseError(f"not a number: {f!r}", line) from None
        if not math.isfinite(v):
            raise ParseError(f"non-finite coordinate: {f!r}", line)
        out.append(v)
    return out


def save_segments_csv(path, L: Sequence[Segment]):
    if not L:
        raise InvalidParameterError("refusing to write an empty segment file without d")
    d = L[0].d
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["d"] + [f"a{i+1}" for i in range(d)] + [f"b{i+1}" for i in range(d)])
        for s in L:
            a, b = s.endpoints
            w.writerow([d] + [_fmt(v) for v in a] + [_fmt(v) for v in b])


def load_segments_csv(path) -> list[Segment]:
    out: list[Segment] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not header or header[0] != "d":
            raise ParseError("missing segment header", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                d = int(row[0])
            except ValueError:
                raise ParseError(f"bad dimension field {row[0]!r}", lineno) from None
            if len(row) != 1 + 2 * d:
                raise ParseError(
                    f"expected {1 + 2 * d} columns for d={d}, got {len(row)}", lineno
                )
            vals = _parse_floats(row[1:], lineno)
            out.append(Segment.from_endpoints(vals[:d], vals[d:]))
    return out


def save_motion_vectors(path, records: Sequence[MotionVectorRecord]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "x1", "y1", "x2", "y2"])
        for r in records:
            w.writerow([r.frame, _fmt(r.x1), _fmt(r.y1), _fmt(r.x2), _fmt(r.y2)])


def load_motion_vectors(path) -> list[MotionVectorRecord]:
    out: list[MotionVectorRecord] = []
    last_frame = -1
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["frame", "x1", "y1", "x2", "y2"]:
            raise ParseError("bad motion-vector header", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ParseError(f"expected 5 columns, got {len(row)}", lineno)
            try:
                frame = int(row[0])
            except ValueError:
                raise ParseError(f"bad frame index {row[0]!r}", lineno) from None
            if frame < 0:
                raise ParseError("negative frame index", lineno)
            if frame < last_frame:
                raise ParseError(
                    f"frame {frame} after frame {last_frame}: not monotone", lineno
                )
            last_frame = frame
            vals = _parse_floats(row[1:], lineno)
            out.append(MotionVectorRecord(frame, *vals))
    return out


def save_weighted_points_csv(path, P: WeightedPointSet):
    d = P.d
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["d"] + [f"x{i+1}" for i in range(d)] + ["weight"])
        for p, wt in zip(P.points, P.weights):
            w.writerow([d] + [_fmt(v) for v in p] + [_fmt(wt)])


def load_weighted_points_csv(path) -> WeightedPointSet:
    pts, ws = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not header or header[0] != "d":
            raise ParseError("missing weighted-point header", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                d = int(row[0])
            except ValueError:
                raise ParseError(f"bad dimension field {row[0]!r}", lineno) from None
            if len(row) != d + 2:
                raise ParseError(f"expected {d + 2} columns, got {len(row)}", lineno)
            vals = _parse_floats(row[1:], lineno)
            pts.append(vals[:d])
            ws.append(vals[d])
    if not pts:
        raise ParseError("no points in file")
    return WeightedPointSet(np.array(pts), np.array(ws))


def load_roads_fixture() -> list[Segment]:
    """The bundled road-shaped segment fixture (lon/lat endpoint pairs)."""
    here = Path(__file__).parent / "data" / "roads_fixture.csv"
    return load_segments_csv(here)
