"""End-to-end coreset pipelines.

Segments: per-segment grid coresets at epsilon/2, union, then sensitivity
sampling at epsilon/4 with the grid weight reinstated on the output.

Convex bodies: rejection sampling of uniform points inside each body from
its oriented bounding box, importance weights from the box volume, then the
same sensitivity-sampling reduction.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    GridOverflowError,
    InvalidParameterError,
    SamplingStallError,
)
from .geometry import CoresetParams, LipSpec, Segment, WeightedPointSet
from .grid import _MAX_GRID, build_segment_grids, grid_resolution
from .points import core_set_arrays

__all__ = [
    "ConvexBody",
    "PipelineReport",
    "box_body",
    "ball_body",
    "ellipsoid_body",
    "polytope_body",
    "sample_body",
    "convex_sample_count",
    "coreset_of_segments",
    "coreset_of_convex",
]


@dataclass(frozen=True)
class ConvexBody:
    """Membership oracle plus an oriented bounding box (center, orthonormal
    axis rows, half extents).  ``membership`` must accept an (m, d) array
    and return a boolean mask."""

    membership: Callable[[np.ndarray], np.ndarray]
    center: np.ndarray
    axes: np.ndarray
    half_extents: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        A = np.asarray(self.axes, dtype=float)
        h = np.asarray(self.half_extents, dtype=float)
        if A.shape != (c.size, c.size) or h.shape != (c.size,):
            raise DimensionMismatchError("bbox pieces must agree on dimension")
        if np.any(h <= 0):
            raise InvalidParameterError("bounding box must have positive volume")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "axes", A)
        object.__setattr__(self, "half_extents", h)

    @property
    def d(self) -> int:
        return self.center.size

    @property
    def bbox_volume(self) -> float:
        return float(np.prod(2.0 * self.half_extents))


@dataclass(frozen=True)
class PipelineReport:
    coreset: WeightedPointSet
    intermediate_size: int
    final_size: int
    eps_prime: int
    sample_size: int
    timings: dict[str, float]
    seed: int
    acceptance_rates: tuple[float, ...] | None = None


def box_body(center, half_extents, axes=None) -> ConvexBody:
    center = np.asarray(center, dtype=float)
    A = np.eye(center.size) if axes is None else np.asarray(axes, dtype=float)
    h = np.asarray(half_extents, dtype=float)

    def member(p: np.ndarray) -> np.ndarray:
        local = (np.atleast_2d(p) - center) @ A.T
        return np.all(np.abs(local) <= h * (1 + 1e-12), axis=1)

    return ConvexBody(member, center, A, h)


def ball_body(center, radius: float) -> ConvexBody:
    center = np.asarray(center, dtype=float)

    def member(p: np.ndarray) -> np.ndarray:
        diff = np.atleast_2d(p) - center
        return np.einsum("ij,ij->i", diff, diff) <= radius**2

    return ConvexBody(member, center, np.eye(center.size), np.full(center.size, float(radius)))


def ellipsoid_body(center, semi_axes, axes=None) -> ConvexBody:
    center = np.asarray(center, dtype=float)
    semi = np.asarray(semi_axes, dtype=float)
    A = np.eye(center.size) if axes is None else np.asarray(axes, dtype=float)

    def member(p: np.ndarray) -> np.ndarray:
        local = (np.atleast_2d(p) - center) @ A.T / semi
        return np.einsum("ij,ij->i", local, local) <= 1.0

    return ConvexBody(member, center, A, semi)


def polytope_body(vertices) -> ConvexBody:
    """Convex polytope from its vertices: half-space membership via the hull,
    axis-aligned bounding box from the vertex extremes."""
    from scipy.spatial import ConvexHull

    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    hull = ConvexHull(V)
    eqs = hull.equations  # rows [normal, offset], normal @ p + offset <= 0 inside

    def member(p: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(p)
        return np.all(p @ eqs[:, :-1].T + eqs[:, -1] <= 1e-9, axis=1)

    lo, hi = V.min(axis=0), V.max(axis=0)
    center = (lo + hi) / 2.0
    half = np.maximum((hi - lo) / 2.0, np.finfo(float).tiny)
    return ConvexBody(member, center, np.eye(V.shape[1]), half)


def sample_body(body: ConvexBody, count: int, seed) -> tuple[np.ndarray, int]:
    """Rejection-sample ``count`` uniform members; returns (points, proposals).

    Aborts with a diagnostic when 1e6 * count consecutive proposals are all
    rejected (broken membership or a far-from-minimal bounding box)."""
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    got = 0
    proposals = 0
    consecutive_rejects = 0
    stall_limit = int(1e6) * count
    batch = max(256, min(65536, 4 * count))
    while got < count:
        u = rng.uniform(-1.0, 1.0, size=(batch, body.d)) * body.half_extents
        cand = body.center + u @ body.axes
        mask = body.membership(cand)
        proposals += batch
        n_ok = int(mask.sum())
        if n_ok == 0:
            consecutive_rejects += batch
            if consecutive_rejects >= stall_limit:
                raise SamplingStallError(
                    f"{consecutive_rejects} consecutive rejections; check the "
                    "membership oracle and bounding box"
                )
            continue
        consecutive_rejects = 0
        take = cand[mask][: count - got]
        accepted.append(take)
        got += take.shape[0]
        # proposals that produced points beyond `count` are not counted
        if got == count and take.shape[0] < n_ok:
            idx_last = np.flatnonzero(mask)[take.shape[0] - 1]
            proposals -= batch - int(idx_last) - 1
    return np.concatenate(accepted, axis=0), proposals


def convex_sample_count(
    params: CoresetParams, d: int, r: float, cstar: float = 1.0
) -> int:
    """lambda = c* d* (t+1)/eps^2 * (k log2(t+1) + log2(2/delta)) with
    t = (20k)^(d(r+1)); guarded against overflow."""
    k = params.k
    t = (20.0 * k) ** (d * (r + 1.0))
    lam = (
        cstar
        * params.dstar(d)
        * (t + 1.0)
        / params.epsilon**2
        * (k * math.log2(t + 1.0) + math.log2(2.0 / params.delta))
    )
    if not math.isfinite(lam) or lam > _MAX_GRID:
        raise GridOverflowError(
            f"per-body sample count {lam:.3g} exceeds {_MAX_GRID}; lower cstar "
            "or pass samples_per_body"
        )
    return int(math.ceil(lam))


def coreset_of_segments(
    L: Sequence[Segment],
    params: CoresetParams,
    lip: LipSpec,
    seed: int,
    grid_size: int | None = None,
) -> PipelineReport:
    """Grid coresets at epsilon/2 per segment, union, sensitivity sampling at
    epsilon/4, final weights w'(p) divided by the grid count.

    ``grid_size`` replaces the resolution formula with a fixed number of grid
    points per segment (the benchmarks use small fixed grids)."""
    if not L:
        raise InvalidParameterError("need at least one segment")
    d = L[0].d
    if any(s.d != d for s in L):
        raise DimensionMismatchError("segments must share one dimension")
    t0 = time.perf_counter()
    if grid_size is not None:
        if grid_size < 2:
            raise InvalidParameterError("grid_size must be >= 2")
        n_grid = grid_size - 1
    else:
        n_grid = grid_resolution(params.k, params.epsilon / 2.0, lip.r)
    per_seg = n_grid + 1
    total = per_seg * len(L)
    pts = build_segment_grids(L, per_seg)
    t1 = time.perf_counter()
    reduced_pts, w_prime, m, _, _ = core_set_arrays(
        pts,
        None,
        params.with_epsilon(params.epsilon / 4.0),
        lip,
        seed,
        keep_profile=False,
    )
    if grid_size is not None:
        eps_prime = n_grid
    else:
        eps_prime = math.ceil(
            8.0 * params.k * (20.0 * params.k) ** (lip.r + 1.0) / params.epsilon
        )
    coreset = WeightedPointSet(reduced_pts.copy(), w_prime / eps_prime)
    t2 = time.perf_counter()
    return PipelineReport(
        coreset=coreset,
        intermediate_size=total,
        final_size=len(coreset),
        eps_prime=eps_prime,
        sample_size=m,
        timings={"segment_grids": t1 - t0, "reduce": t2 - t1},
        seed=seed,
    )


def coreset_of_convex(
    K: Sequence[ConvexBody],
    params: CoresetParams,
    lip: LipSpec,
    seed: int,
    cstar: float = 1.0,
    samples_per_body: int | None = None,
) -> PipelineReport:
    """Uniform rejection samples per body, box-volume importance weights,
    then the sensitivity-sampling reduction at (epsilon/4, delta/2).

    ``samples_per_body`` overrides the theoretical per-body count, which is
    far beyond desk scale for its default constant."""
    if not K:
        raise InvalidParameterError("need at least one body")
    d = K[0].d
    if d < 2:
        raise InvalidParameterError("convex pipeline requires dimension >= 2")
    if any(b.d != d for b in K):
        raise DimensionMismatchError("bodies must share one dimension")
    lam = samples_per_body or convex_sample_count(params, d, lip.r, cstar)
    t0 = time.perf_counter()
    chunks = []
    weights = []
    rates = []
    for i, body in enumerate(K):
        pts, proposals = sample_body(body, lam, np.random.SeedSequence([seed, i]))
        chunks.append(pts)
        weights.append(np.full(lam, body.bbox_volume / proposals))
        rates.append(lam / proposals)
    all_pts = np.concatenate(chunks, axis=0)
    all_w = np.concatenate(weights)
    t1 = time.perf_counter()
    reduced_pts, w_prime, m, _, _ = core_set_arrays(
        all_pts,
        all_w,
        replace(params, epsilon=params.epsilon / 4.0, delta=params.delta / 2.0),
        lip,
        seed,
        keep_profile=False,
    )
    coreset = WeightedPointSet(reduced_pts.copy(), w_prime)
    t2 = time.perf_counter()
    return PipelineReport(
        coreset=coreset,
        intermediate_size=lam * len(K),
        final_size=len(coreset),
        eps_prime=lam,
        sample_size=m,
        timings={"rejection_sampling": t1 - t0, "reduce": t2 - t1},
        seed=seed,
        acceptance_rates=tuple(rates),
    )
