"""Motion-vector tracking over pre-extracted displacement streams.

Per window of consecutive frames: each vector becomes a 4-D segment (start
position, end position, two angle features shared by both endpoints), is
replaced by a fixed 10-point grid, and the union is clustered with k-means.
The largest cluster's raw 2-D start/end means form the track.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError
from .data_io import MotionVectorRecord
from .geometry import Segment, WeightedPointSet
from .solver import kmeanspp_seed, lloyd

__all__ = ["TrackEntry", "TrackState", "featurize", "track_window", "run_tracker"]

TRACK_GRID_POINTS = 10  # fixed per-vector grid size used by the experiments
MAX_WINDOW_VECTORS = 1000


@dataclass(frozen=True)
class TrackEntry:
    window: int
    mean_start: np.ndarray
    mean_end: np.ndarray
    largest_cluster_size: int


@dataclass
class TrackState:
    frame_dims: tuple[int, int]
    track: list[TrackEntry] = field(default_factory=list)
    vectors_processed: int = 0
    elapsed_seconds: float = 0.0

    @property
    def vectors_per_second(self) -> float:
        if self.elapsed_seconds <= 0.0:
            return 0.0
        return self.vectors_processed / self.elapsed_seconds


def _angle_features(dx: float, dy: float, frame_dims) -> tuple[float, float]:
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return 0.0, 0.0  # zero-length vector convention
    # angles to the fixed axes (0,1) and (1,0), in degrees within [0, 180]
    theta1 = math.degrees(math.acos(max(-1.0, min(1.0, dy / norm))))
    theta2 = math.degrees(math.acos(max(-1.0, min(1.0, dx / norm))))
    scale = max(frame_dims) / 180.0
    return theta1 * scale, theta2 * scale


def featurize(mv: MotionVectorRecord, frame_dims) -> Segment:
    """4-D segment: (x1, y1, f1, f2) -> (x2, y2, f1, f2) with angle features
    constant along the segment."""
    if frame_dims[0] <= 0 or frame_dims[1] <= 0:
        raise InvalidParameterError("frame dimensions must be positive")
    f1, f2 = _angle_features(mv.x2 - mv.x1, mv.y2 - mv.y1, frame_dims)
    return Segment.from_endpoints((mv.x1, mv.y1, f1, f2), (mv.x2, mv.y2, f1, f2))


def _feature_endpoints(vectors: Sequence[MotionVectorRecord], frame_dims) -> np.ndarray:
    """(n, 8) array of featurized start/end 4-D coordinates, vectorized."""
    arr = np.array([[v.x1, v.y1, v.x2, v.y2] for v in vectors])
    dx = arr[:, 2] - arr[:, 0]
    dy = arr[:, 3] - arr[:, 1]
    norm = np.hypot(dx, dy)
    safe = np.where(norm > 0, norm, 1.0)
    theta1 = np.degrees(np.arccos(np.clip(dy / safe, -1.0, 1.0)))
    theta2 = np.degrees(np.arccos(np.clip(dx / safe, -1.0, 1.0)))
    scale = max(frame_dims) / 180.0
    f1 = np.where(norm > 0, theta1 * scale, 0.0)
    f2 = np.where(norm > 0, theta2 * scale, 0.0)
    out = np.empty((arr.shape[0], 8))
    out[:, 0:2] = arr[:, 0:2]
    out[:, 2] = f1
    out[:, 3] = f2
    out[:, 4:6] = arr[:, 2:4]
    out[:, 6] = f1
    out[:, 7] = f2
    return out


def track_window(
    vectors: Sequence[MotionVectorRecord],
    k: int,
    frame_dims,
    seed: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cluster one window; returns (mean_start, mean_end, cluster_sizes).

    Uniformly subsamples to at most 1000 vectors, expands each featurized
    segment to its 10-point grid, k-means clusters the union, assigns each
    vector to the center nearest its grid mean, and averages the largest
    cluster's raw 2-D start and end positions.  Size ties break toward the
    lower center index.
    """
    if k < 2:
        raise InvalidParameterError("tracking requires k >= 2")
    if not vectors:
        raise InvalidParameterError("empty window")
    rng = np.random.default_rng(seed)
    if len(vectors) > MAX_WINDOW_VECTORS:
        keep = rng.choice(len(vectors), size=MAX_WINDOW_VECTORS, replace=False)
        vectors = [vectors[i] for i in keep]
    feats = _feature_endpoints(vectors, frame_dims)  # (n, 8)
    start4, end4 = feats[:, :4], feats[:, 4:]
    g = TRACK_GRID_POINTS
    x = (np.arange(g, dtype=float) / (g - 1))[None, :, None]
    grid = start4[:, None, :] + x * (end4 - start4)[:, None, :]  # (n, g, 4)
    pts = grid.reshape(-1, 4)
    P = WeightedPointSet(pts, np.full(pts.shape[0], 1.0 / (g - 1)))
    init = kmeanspp_seed(P, k, int(rng.integers(2**63)))
    res = lloyd(P, init, max_iter=25, seed=seed)
    means4 = grid.mean(axis=1)  # per-vector grid mean
    diff = means4[:, None, :] - res.centers.centers[None, :, :]
    labels = np.argmin(np.einsum("ijk,ijk->ij", diff, diff), axis=1)
    sizes = np.bincount(labels, minlength=k)
    largest = int(np.argmax(sizes))  # argmax takes the lowest index on ties
    sel = labels == largest
    arr = np.array([[v.x1, v.y1, v.x2, v.y2] for v in vectors])
    mean_start = arr[sel, 0:2].mean(axis=0)
    mean_end = arr[sel, 2:4].mean(axis=0)
    return mean_start, mean_end, sizes


def run_tracker(
    records: Sequence[MotionVectorRecord],
    k: int,
    frame_dims,
    window_len: int = 10,
    seed: int = 0,
) -> TrackState:
    """Non-overlapping windows of ``window_len`` frames over a frame-sorted
    stream; an empty window holds the previous track value."""
    state = TrackState(frame_dims=tuple(frame_dims))
    if not records:
        return state
    frames = [r.frame for r in records]
    if any(b < a for a, b in zip(frames, frames[1:])):
        raise InvalidParameterError("records must be sorted by frame")
    first, last = frames[0], frames[-1]
    t0 = time.perf_counter()
    pos = 0
    win = 0
    for lo in range(first, last + 1, window_len):
        hi = lo + window_len
        start_pos = pos
        while pos < len(records) and records[pos].frame < hi:
            pos += 1
        vectors = records[start_pos:pos]
        if not vectors:
            if state.track:
                prev = state.track[-1]
                state.track.append(
                    TrackEntry(win, prev.mean_start, prev.mean_end, 0)
                )
            else:
                zero = np.zeros(2)
                state.track.append(TrackEntry(win, zero, zero, 0))
            win += 1
            continue
        win_seed = int(np.random.SeedSequence([seed, win]).generate_state(1)[0])
        mean_start, mean_end, sizes = track_window(vectors, k, frame_dims, win_seed)
        state.track.append(
            TrackEntry(win, mean_start, mean_end, int(sizes.max()))
        )
        state.vectors_processed += len(vectors)
        win += 1
    state.elapsed_seconds = time.perf_counter() - t0
    return state
