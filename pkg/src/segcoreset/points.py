"""Point-set compression: bicriteria centers + sensitivity sampling.

Realizes the black-box weighted-point coreset used by the pipeline: a
cheap over-approximation of the k centers bounds each point's worst-case
cost share (its sensitivity), and importance sampling proportional to the
bound yields an unbiased, concentrated cost estimator.

All heavy passes are chunked so inputs of 1e8 points fit in a few GB;
array-level entry points (suffix ``_arrays``) accept ``weights=None`` for
implicit unit weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .geometry import CenterSet, CoresetParams, LipSpec, WeightedPointSet

__all__ = [
    "SensitivityProfile",
    "PointCoresetOutput",
    "bicriteria",
    "compute_sensitivities",
    "core_set",
]

_CHUNK = 1 << 18


@dataclass(frozen=True)
class SensitivityProfile:
    """Per-point sensitivity upper bounds and their sum."""

    sensitivities: np.ndarray
    total: float


@dataclass(frozen=True)
class PointCoresetOutput:
    """Sampled coreset, the RNG seed used, and the driving profile.

    ``requested_size`` is the sample-count formula value m; the stored
    sample may hold fewer distinct points because duplicate draws merge
    by summing weights.
    """

    sample: WeightedPointSet
    seed: int
    profile: SensitivityProfile | None
    requested_size: int
    identity: bool = False


def _weighted_draw(rng, a: np.ndarray, b: np.ndarray | None) -> int:
    """Draw an index with probability proportional to a*b (b optional),
    using chunked partial sums so no full product array is materialized."""
    n = a.shape[0]
    sums = []
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        c = a[lo:hi] if b is None else a[lo:hi] * b[lo:hi]
        sums.append(float(c.sum()))
    total = float(np.sum(sums))
    if total <= 0.0:
        raise InvalidParameterError("cannot draw from an all-zero distribution")
    u = rng.random() * total
    acc = 0.0
    for ci, s in enumerate(sums):
        if acc + s > u or ci == len(sums) - 1:
            lo = ci * _CHUNK
            hi = min(lo + _CHUNK, n)
            c = a[lo:hi] if b is None else a[lo:hi] * b[lo:hi]
            cs = np.cumsum(c)
            j = int(np.searchsorted(cs, u - acc, side="right"))
            return lo + min(j, hi - lo - 1)
        acc += s
    raise AssertionError("unreachable")


def _update_min_sq(points: np.ndarray, center: np.ndarray, d2: np.ndarray):
    for lo in range(0, points.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, points.shape[0])
        diff = points[lo:hi] - center[None, :]
        np.minimum(d2[lo:hi], np.einsum("ij,ij->i", diff, diff), out=d2[lo:hi])


def _kmeanspp_once(points: np.ndarray, weights: np.ndarray | None, k: int, rng):
    """One weighted k-means++ seeding pass; returns (centers, final min-sq-dist)."""
    n = points.shape[0]
    if weights is None:
        first = int(rng.integers(n))
    else:
        first = _weighted_draw(rng, weights, None)
    centers = [points[first].copy()]
    d2 = np.full(n, np.inf)
    _update_min_sq(points, centers[0], d2)
    for _ in range(1, k):
        if float(d2.max()) <= 0.0:
            nxt = int(rng.integers(n))  # support smaller than k: duplicate centers
        else:
            nxt = _weighted_draw(rng, d2, weights)
        centers.append(points[nxt].copy())
        _update_min_sq(points, centers[-1], d2)
    return np.array(centers), d2


def _lip_cost_from_d2(d2: np.ndarray, weights: np.ndarray | None, lip: LipSpec) -> float:
    total = 0.0
    for lo in range(0, d2.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, d2.shape[0])
        v = lip.apply(np.sqrt(d2[lo:hi]))
        total += float(v.sum() if weights is None else weights[lo:hi] @ v)
    return total


def bicriteria_arrays(
    points: np.ndarray, weights: np.ndarray | None, k: int, lip: LipSpec, seed: int
) -> CenterSet:
    n = points.shape[0]
    if n < 1:
        raise InvalidParameterError("empty input")
    reps = max(1, math.ceil(math.log2(1 + n)))
    rng = np.random.default_rng(seed)
    best_centers, best_cost = None, np.inf
    for _ in range(reps):
        centers, d2 = _kmeanspp_once(points, weights, k, rng)
        cost = _lip_cost_from_d2(d2, weights, lip)
        del d2  # free before the next pass allocates its own
        if cost < best_cost:
            best_centers, best_cost = centers, cost
    return CenterSet(best_centers)


def bicriteria(P: WeightedPointSet, k: int, lip: LipSpec, seed: int) -> CenterSet:
    """k centers from weighted k-means++ seeding, best of ceil(log2(1+|P|))
    repetitions by weighted cost under ``lip``."""
    return bicriteria_arrays(P.points, P.weights, k, lip, seed)


def _assign(points: np.ndarray, centers: np.ndarray):
    """Nearest plain-Euclidean center per point (chunked): (min_dist, label)."""
    n = points.shape[0]
    dmin = np.empty(n)
    labels = np.empty(n, dtype=np.int32)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        diff = points[lo:hi, None, :] - centers[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        labels[lo:hi] = np.argmin(d2, axis=1)
        dmin[lo:hi] = np.sqrt(d2[np.arange(hi - lo), labels[lo:hi]])
    return dmin, labels


def compute_sensitivities_arrays(
    points: np.ndarray, weights: np.ndarray | None, B: CenterSet, lip: LipSpec
) -> np.ndarray:
    n = points.shape[0]
    dmin, labels = _assign(points, B.centers)
    dlip = lip.apply(dmin)
    del dmin  # may alias dlip; drop the extra reference on huge inputs
    w = weights if weights is not None else None
    cost = float(dlip.sum() if w is None else w @ dlip)
    if cost <= 0.0:
        return np.full(n, 1.0 / n)
    # chunked accumulation: bincount on the full int32 label array would
    # materialize an int64 cast of it
    cluster_w = np.zeros(B.k)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        cluster_w += np.bincount(
            labels[lo:hi], weights=None if w is None else w[lo:hi], minlength=B.k
        )
    cluster_w = np.maximum(cluster_w, np.finfo(float).tiny)
    inv_cluster_w = 1.0 / cluster_w
    sens = dlip
    sens /= cost
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        if w is not None:
            sens[lo:hi] *= w[lo:hi]
            sens[lo:hi] += w[lo:hi] * inv_cluster_w[labels[lo:hi]]
        else:
            sens[lo:hi] += inv_cluster_w[labels[lo:hi]]
    return sens


def compute_sensitivities(
    P: WeightedPointSet, B: CenterSet, lip: LipSpec
) -> SensitivityProfile:
    """Standard sensitivity bound w(p)*D(B,p)/cost(P,B) + w(p)/weight(cluster(p)).

    Falls back to the uniform profile when the bicriteria cost collapses
    to zero (all points on their centers)."""
    sens = compute_sensitivities_arrays(P.points, P.weights, B, lip)
    return SensitivityProfile(sensitivities=sens, total=float(sens.sum()))


def sample_size(params: CoresetParams, n: int, d: int) -> int:
    """m = ceil(c * (k+1)^kappa * log2(n)^2 / eps^2 * (d* + log2(1/delta)))."""
    if n < 1:
        raise InvalidParameterError("empty input")
    logn = math.log2(max(n, 2))
    m = (
        params.sample_factor
        * (params.k + 1) ** params.sample_exponent
        * logn**2
        / params.epsilon**2
        * (params.dstar(d) + math.log2(1.0 / params.delta))
    )
    return int(math.ceil(m))


def core_set_arrays(
    points: np.ndarray,
    weights: np.ndarray | None,
    params: CoresetParams,
    lip: LipSpec,
    seed: int,
    keep_profile: bool = True,
):
    """Array-level sensitivity-sampling coreset.

    Returns (sample_points, sample_weights, requested_size, profile, identity).
    When the formula size m reaches |P| the input is returned unchanged.
    """
    n = points.shape[0]
    m = sample_size(params, n, points.shape[1])
    if m >= n:
        w = weights if weights is not None else np.ones(n)
        return points, w, m, None, True
    B = bicriteria_arrays(points, weights, params.k, lip, seed)
    sens = compute_sensitivities_arrays(points, weights, B, lip)
    profile = None
    if keep_profile:
        profile = SensitivityProfile(sens.copy(), float(sens.sum()))
        cum = np.cumsum(sens)
    else:
        cum = np.cumsum(sens, out=sens)  # destroys sens to save a pass of memory
    total = float(cum[-1])
    rng = np.random.default_rng(seed)
    u = rng.random(m) * total
    idx = np.searchsorted(cum, u, side="right")
    np.clip(idx, 0, n - 1, out=idx)
    uniq, counts = np.unique(idx, return_counts=True)
    sens_vals = cum[uniq] - np.where(uniq > 0, cum[uniq - 1], 0.0)
    sens_vals = np.maximum(sens_vals, np.finfo(float).tiny)
    base_w = weights[uniq] if weights is not None else 1.0
    out_w = counts * base_w * total / (m * sens_vals)
    return points[uniq], out_w, m, profile, False


def core_set(
    P: WeightedPointSet, params: CoresetParams, lip: LipSpec, seed: int
) -> PointCoresetOutput:
    """Sensitivity-sampling coreset of a weighted point set.

    Samples m points i.i.d. proportional to sensitivity and reweights by
    w(p) * total / (m * sens(p)); duplicate draws merge by summing weights.
    Identical seeds give bit-identical output.
    """
    pts, w, m, profile, identity = core_set_arrays(
        P.points, P.weights, params, lip, seed, keep_profile=True
    )
    return PointCoresetOutput(
        sample=WeightedPointSet(pts, w),
        seed=seed,
        profile=profile,
        requested_size=m,
        identity=identity,
    )
