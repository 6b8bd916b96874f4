"""Weighted k-means++ seeding and weighted Lloyd refinement.

The squared-distance solver applied to (coreset) point sets; segment inputs
are first discretized to per-segment grids and solved on the union.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .geometry import CenterSet, CoresetParams, Segment, WeightedPointSet
from .grid import grid_resolution
from .points import _kmeanspp_once

__all__ = ["SolveResult", "kmeanspp_seed", "lloyd", "solve_segments"]

_CHUNK = 1 << 18


@dataclass(frozen=True)
class SolveResult:
    centers: CenterSet
    cost: float
    iterations: int
    seed: int


def kmeanspp_seed(P: WeightedPointSet, k: int, seed: int) -> CenterSet:
    """D^2-weighted seeding: first center drawn proportional to weight, each
    next proportional to weight times squared distance to the chosen set."""
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    if P.total_weight <= 0.0:
        raise InvalidParameterError("total weight must be positive")
    rng = np.random.default_rng(seed)
    centers, _ = _kmeanspp_once(P.points, P.weights, k, rng)
    return CenterSet(centers)


def _assign_sq(points: np.ndarray, centers: np.ndarray):
    n = points.shape[0]
    d2min = np.empty(n)
    labels = np.empty(n, dtype=np.int32)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        diff = points[lo:hi, None, :] - centers[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        labels[lo:hi] = np.argmin(d2, axis=1)
        d2min[lo:hi] = d2[np.arange(hi - lo), labels[lo:hi]]
    return d2min, labels


def lloyd(
    P: WeightedPointSet,
    init: CenterSet,
    max_iter: int = 100,
    tol: float = 1e-6,
    seed: int = 0,
) -> SolveResult:
    """Weighted Lloyd iterations under the squared-distance objective.

    An empty cluster is re-seeded at the point of maximum weighted squared
    distance.  Stops when the relative cost improvement drops below ``tol``.
    """
    pts, w = P.points, P.weights
    k = init.k
    centers = init.centers.copy()
    d2, labels = _assign_sq(pts, centers)
    cost = float(w @ d2)
    it = 0
    for it in range(1, max_iter + 1):
        cw = np.bincount(labels, weights=w, minlength=k)
        new_centers = np.empty_like(centers)
        for j in range(pts.shape[1]):
            sums = np.bincount(labels, weights=w * pts[:, j], minlength=k)
            new_centers[:, j] = np.divide(
                sums, cw, out=centers[:, j].copy(), where=cw > 0
            )
        for c in np.flatnonzero(cw == 0):
            new_centers[c] = pts[int(np.argmax(w * d2))]
        centers = new_centers
        d2, labels = _assign_sq(pts, centers)
        new_cost = float(w @ d2)
        if cost > 0 and (cost - new_cost) / cost < tol:
            cost = new_cost
            break
        cost = new_cost
        if cost == 0.0:
            break
    return SolveResult(
        centers=CenterSet(centers), cost=cost, iterations=it, seed=seed
    )


def segments_to_grid_union(
    L: list[Segment], k: int, epsilon: float, grid_size: int | None = None
) -> WeightedPointSet:
    """Union of per-segment uniform grids with their 1/n weights.

    ``grid_size`` overrides the resolution formula with a fixed number of
    points per segment (the experimental protocol uses small fixed grids).
    """
    if not L:
        raise InvalidParameterError("need at least one segment")
    if grid_size is not None:
        if grid_size < 2:
            raise InvalidParameterError("grid_size must be >= 2")
        n = grid_size - 1
    else:
        n = grid_resolution(k, epsilon, r=2.0)
    from .grid import build_segment_grids

    pts = build_segment_grids(L, n + 1)
    w = np.full(pts.shape[0], 1.0 / n)
    return WeightedPointSet(pts, w)


def solve_segments(
    L: list[Segment],
    k: int,
    params: CoresetParams,
    seed: int,
    grid_size: int | None = None,
) -> SolveResult:
    """Discretize each segment, then best of ceil(log2(1+n)) seeded
    k-means++ + Lloyd runs on the union, under the squared objective."""
    P = segments_to_grid_union(L, k, params.epsilon, grid_size=grid_size)
    reps = max(1, math.ceil(math.log2(1 + len(L))))
    best: SolveResult | None = None
    for rep in range(reps):
        rep_seed = int(np.random.SeedSequence([seed, rep]).generate_state(1)[0])
        init = kmeanspp_seed(P, k, rep_seed)
        res = lloyd(P, init, seed=seed)
        if best is None or res.cost < best.cost:
            best = res
    assert best is not None
    return best
