"""Deterministic per-segment grid coreset.

A segment is compressed to the uniform grid {s(i/n) : i = 0..n} with all
weights 1/n, where n is driven by (k, r, epsilon).  The grid sum then
approximates the loss integral within a 1+-epsilon factor for every weighted
k-center query, with no failure probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import GridOverflowError, InvalidParameterError
from .geometry import (
    CenterSet,
    LipSpec,
    Segment,
    WeightedPointSet,
    _weighted_sq_coeffs,
    lifted_distances,
    nearest_center_breakpoints,
)

__all__ = [
    "SegCoresetOutput",
    "grid_resolution",
    "seg_coreset",
    "coreset_cost",
    "grid_cost",
    "iter_grid",
]

_MAX_GRID = 2**31 - 2
_CHUNK = 1 << 16


def grid_resolution(k: int, epsilon: float, r: float) -> int:
    """Grid count ceil(4k * (20k)^(r+1) / epsilon), with an overflow guard."""
    if k < 1:
        raise InvalidParameterError("k must be a positive integer")
    if not (0.0 < epsilon < 1.0):
        raise InvalidParameterError("epsilon must lie in (0, 1)")
    val = 4.0 * k * (20.0 * k) ** (r + 1.0) / epsilon
    if not math.isfinite(val) or val > _MAX_GRID:
        raise GridOverflowError(
            f"grid resolution {val:.3g} exceeds {_MAX_GRID} (k={k}, r={r}, eps={epsilon})"
        )
    return int(math.ceil(val))


@dataclass(frozen=True)
class SegCoresetOutput:
    """Materialized grid coreset of one segment: n+1 points of weight 1/n."""

    points: WeightedPointSet
    eps_prime: int
    segment: Segment


def seg_coreset(s: Segment, k: int, epsilon: float, lip: LipSpec) -> SegCoresetOutput:
    """Build the uniform grid coreset of one segment.

    The grid includes both endpoints (i = 0..n), each with weight 1/n, so
    the total weight is 1 + 1/n; no renormalization is applied.
    """
    n = grid_resolution(k, epsilon, lip.r)
    x = np.arange(n + 1, dtype=float) / n
    pts = s.point_at(x)
    w = np.full(n + 1, 1.0 / n)
    return SegCoresetOutput(points=WeightedPointSet(pts, w), eps_prime=n, segment=s)


def coreset_cost(out: SegCoresetOutput | WeightedPointSet, q: CenterSet, lip: LipSpec) -> float:
    """Weighted sum of lifted distances of a (materialized) coreset."""
    P = out.points if isinstance(out, SegCoresetOutput) else out
    total = 0.0
    for lo in range(0, len(P), _CHUNK):
        hi = min(lo + _CHUNK, len(P))
        total += float(
            P.weights[lo:hi] @ lifted_distances(q, lip, P.points[lo:hi])
        )
    return total


def build_segment_grids(L, grid_points: int, out: np.ndarray | None = None) -> np.ndarray:
    """Stacked uniform grids of several segments as one ((n*g), d) array.

    Vectorized over segments in blocks so the cost is proportional to the
    total number of written coordinates, not to the segment count alone.
    """
    if grid_points < 2:
        raise InvalidParameterError("grid_points must be >= 2")
    n = len(L)
    d = L[0].d
    g = grid_points
    x = np.arange(g, dtype=float) / (g - 1)
    # grid rows are an affine function of x: [x, 1] @ [[v], [u]]
    X2 = np.stack([x, np.ones(g)], axis=1)
    if out is None:
        out = np.empty((n * g, d))
    block = max(1, (1 << 22) // (g * d))
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        VU = np.stack(
            [[L[i].v, L[i].u] for i in range(lo, hi)], axis=0
        )  # (b, 2, d)
        view = out[lo * g : hi * g].reshape(hi - lo, g, d)
        np.matmul(X2, VU, out=view)
    return out


def iter_grid(s: Segment, n: int, chunk: int = _CHUNK) -> Iterator[np.ndarray]:
    """Stream the grid points s(i/n), i = 0..n, in chunks; nothing is retained."""
    for lo in range(0, n + 1, chunk):
        hi = min(lo + chunk, n + 1)
        x = np.arange(lo, hi, dtype=float) / n
        yield s.point_at(x)


def _exact_power2_grid_sum(s: Segment, n: int, q: CenterSet) -> float:
    """Sum over i=0..n of the squared lifted distance at s(i/n), evaluated
    per assignment interval with exact integer power sums."""
    a, b, c = _weighted_sq_coeffs(s, q)
    xs = [0.0] + nearest_center_breakpoints(s, q) + [1.0]

    def s1(m: int) -> int:
        return m * (m + 1) // 2

    def s2(m: int) -> int:
        return m * (m + 1) * (2 * m + 1) // 6

    total = 0.0
    i_next = 0
    for idx in range(len(xs) - 1):
        x0, x1 = xs[idx], xs[idx + 1]
        i_lo = i_next
        i_hi = n if idx == len(xs) - 2 else int(math.floor(x1 * n))
        if i_hi < i_lo:
            continue
        i_next = i_hi + 1
        mid = 0.5 * (x0 + x1)
        vals = (a * mid + b) * mid + c
        j = int(np.argmin(vals))
        cnt = i_hi - i_lo + 1
        d2 = s2(i_hi) - s2(i_lo - 1) if i_lo > 0 else s2(i_hi)
        d1 = s1(i_hi) - s1(i_lo - 1) if i_lo > 0 else s1(i_hi)
        total += a[j] * (d2 / n**2) + b[j] * (d1 / n) + c[j] * cnt
    return total


def grid_cost(s: Segment, n: int, q: CenterSet, lip: LipSpec) -> float:
    """(1/n) * sum over i=0..n of the lifted distance at s(i/n).

    Equals the cost of the grid coreset without materializing it.  For the
    squared transform the per-interval sums are closed forms, so this is
    O(k^2) regardless of n; other kinds stream the grid in chunks.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if not np.any(s.v):
        from .geometry import lifted_distance

        return lifted_distance(q, lip, s.u) * (n + 1) / n
    if lip.kind == "power" and lip.r == 2.0:
        return _exact_power2_grid_sum(s, n, q) / n
    total = 0.0
    for pts in iter_grid(s, n):
        total += float(lifted_distances(q, lip, pts).sum())
    return total / n
