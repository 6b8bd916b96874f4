"""Core domain types and exact loss evaluation.

The vocabulary of the whole package: segments as affine maps of [0,1],
weighted point sets, weighted center queries, and the monotone distance
transform applied to weighted Euclidean distances.  Also provides the
closed-form integral of the nearest-weighted-center distance along a
segment for the two transforms where it exists (identity and squared).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    UnsupportedLipError,
)

__all__ = [
    "Segment",
    "WeightedPointSet",
    "CenterSet",
    "LipSpec",
    "CoresetParams",
    "lifted_distance",
    "lifted_distances",
    "nearest_center_breakpoints",
    "segment_loss_exact",
    "set_loss",
]

# Tolerance on the discriminant when solving for assignment breakpoints.
_BREAKPOINT_TOL = 1e-12


def _as_vector(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise InvalidParameterError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError(f"{name} contains NaN or Inf")
    return a


@dataclass(frozen=True)
class Segment:
    """Affine map x -> u + v*x restricted to x in [0,1].

    ``v`` may be the zero vector; a degenerate point-segment is legal.
    """

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _as_vector(self.u, "u"))
        object.__setattr__(self, "v", _as_vector(self.v, "v"))
        if self.u.shape != self.v.shape:
            raise DimensionMismatchError(
                f"u has dimension {self.u.size}, v has dimension {self.v.size}"
            )
        self.u.setflags(write=False)
        self.v.setflags(write=False)

    @property
    def d(self) -> int:
        return self.u.size

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.v))

    def point_at(self, x) -> np.ndarray:
        """Evaluate the map; ``x`` may be a scalar or a 1-D array."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return self.u + self.v * float(x)
        return self.u[None, :] + x[:, None] * self.v[None, :]

    @classmethod
    def from_endpoints(cls, a, b) -> "Segment":
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return cls(u=a, v=b - a)

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.u, self.u + self.v


@dataclass(frozen=True)
class WeightedPointSet:
    """Finite points with nonnegative weights; the coreset currency."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if pts.ndim != 2:
            raise InvalidParameterError("points must be an (n, d) array")
        if w.ndim != 1 or w.size != pts.shape[0]:
            raise InvalidParameterError("weights length must match points")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise InvalidParameterError("points/weights contain NaN or Inf")
        if np.any(w < 0):
            raise InvalidParameterError("weights must be nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        pts.setflags(write=False)
        w.setflags(write=False)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class CenterSet:
    """k centers with per-center weights; the query object."""

    centers: np.ndarray
    center_weights: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if c.shape[0] < 1:
            raise InvalidParameterError("need at least one center")
        if self.center_weights is None:
            w = np.ones(c.shape[0])
        else:
            w = np.atleast_1d(np.asarray(self.center_weights, dtype=float))
        if w.shape != (c.shape[0],):
            raise DimensionMismatchError("one weight per center required")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidParameterError("center weights must be finite and >= 0")
        if not np.all(np.isfinite(c)):
            raise InvalidParameterError("centers contain NaN or Inf")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "center_weights", w)
        c.setflags(write=False)
        w.setflags(write=False)

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def d(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class LipSpec:
    """Monotone distance transform with a known log-Lipschitz order ``r``.

    Shipped kinds: ``identity`` (r=1), ``power`` with exponent r, and
    ``huber`` with a threshold (r=2: the quadratic zone forces order 2,
    so the grid formulas use r=2 for it).
    """

    kind: str
    r: float
    threshold: float = 1.0
    eval_cost_t: int = 1

    def __post_init__(self):
        if self.kind not in ("identity", "power", "huber"):
            raise InvalidParameterError(f"unknown lip kind {self.kind!r}")
        if self.r < 0:
            raise InvalidParameterError("r must be nonnegative")
        if self.kind == "huber" and self.threshold <= 0:
            raise InvalidParameterError("huber threshold must be positive")
        if self.eval_cost_t < 1:
            raise InvalidParameterError("eval_cost_t must be a positive integer")

    @classmethod
    def identity(cls) -> "LipSpec":
        return cls(kind="identity", r=1.0)

    @classmethod
    def power(cls, r: float) -> "LipSpec":
        return cls(kind="power", r=float(r))

    @classmethod
    def huber(cls, threshold: float = 1.0) -> "LipSpec":
        return cls(kind="huber", r=2.0, threshold=float(threshold))

    def apply(self, x):
        """Evaluate the transform elementwise on nonnegative input."""
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            # may return the input array itself; callers treat it as read-only
            return x if x.ndim else float(x)
        if self.kind == "power":
            return x**self.r
        t = self.threshold
        return np.where(x <= t, x * x / (2.0 * t), x - t / 2.0)


@dataclass(frozen=True)
class CoresetParams:
    """Shared knobs of the coreset constructions.

    ``vc_dim_dstar`` stands in for the range-space complexity constant; when
    left as None it defaults to ``10 * k * (d + 1)`` at the point of use.
    ``sample_factor`` / ``sample_exponent`` scale the sampling-size formula
    (the theoretical constant is far too conservative for desk scale).
    """

    k: int
    epsilon: float
    delta: float
    vc_dim_dstar: int | None = None
    sample_factor: float = 1.0
    sample_exponent: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameterError("k must be a positive integer")
        if not (0.0 < self.epsilon < 1.0):
            raise InvalidParameterError("epsilon must lie in (0, 1)")
        if not (0.0 < self.delta < 1.0):
            raise InvalidParameterError("delta must lie in (0, 1)")
        if self.vc_dim_dstar is not None and self.vc_dim_dstar < 1:
            raise InvalidParameterError("vc_dim_dstar must be positive")
        if self.sample_factor <= 0 or self.sample_exponent < 0:
            raise InvalidParameterError("invalid sampling constants")

    def dstar(self, d: int) -> int:
        if self.vc_dim_dstar is not None:
            return self.vc_dim_dstar
        return 10 * self.k * (d + 1)

    def with_epsilon(self, epsilon: float) -> "CoresetParams":
        return replace(self, epsilon=epsilon)


def _check_dims(q: CenterSet, d: int):
    if q.d != d:
        raise DimensionMismatchError(f"centers have dimension {q.d}, points {d}")


def lifted_distances(q: CenterSet, lip: LipSpec, points: np.ndarray) -> np.ndarray:
    """min over centers c of lip(w(c) * ||c - p||) for each row p of ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    _check_dims(q, pts.shape[1])
    diff = pts[:, None, :] - q.centers[None, :, :]
    dist = np.linalg.norm(diff, axis=2) * q.center_weights[None, :]
    return lip.apply(dist).min(axis=1)


def lifted_distance(q: CenterSet, lip: LipSpec, p) -> float:
    """Distance of a single point to the weighted center set under ``lip``."""
    p = _as_vector(p, "p")
    return float(lifted_distances(q, lip, p[None, :])[0])


def _weighted_sq_coeffs(s: Segment, q: CenterSet):
    """Per-center quadratic (a, b, c) with w(c)^2 * ||s(x) - c||^2 = a x^2 + b x + c."""
    e = q.centers - s.u[None, :]  # (k, d)
    vv = float(s.v @ s.v)
    w2 = q.center_weights**2
    a = w2 * vv
    b = w2 * (-2.0 * (e @ s.v))
    c = w2 * np.einsum("ij,ij->i", e, e)
    return a, b, c


def nearest_center_breakpoints(s: Segment, q: CenterSet) -> list[float]:
    """x in (0,1) where the minimizing weighted center can change.

    Weighted nearest-center comparisons along the segment reduce, per center
    pair, to the roots of a quadratic in x.  Coincident quadratics contribute
    no breakpoint.
    """
    a, b, c = _weighted_sq_coeffs(s, q)
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))), float(np.max(np.abs(c))))
    out: list[float] = []
    k = q.k
    for i in range(k):
        for j in range(i + 1, k):
            da, db, dc = a[i] - a[j], b[i] - b[j], c[i] - c[j]
            if abs(da) <= _BREAKPOINT_TOL * scale:
                if abs(db) <= _BREAKPOINT_TOL * scale:
                    continue  # identical profiles up to tolerance
                x = -dc / db
                if 0.0 < x < 1.0:
                    out.append(x)
                continue
            disc = db * db - 4.0 * da * dc
            if disc < -_BREAKPOINT_TOL * scale * scale:
                continue
            sq = math.sqrt(max(disc, 0.0))
            for x in ((-db - sq) / (2.0 * da), (-db + sq) / (2.0 * da)):
                if 0.0 < x < 1.0:
                    out.append(x)
    out.sort()
    return out


def _integral_sqrt_quadratic(a: float, b: float, c: float, x0: float, x1: float) -> float:
    """Integral of sqrt(a x^2 + b x + c) over [x0, x1] for a >= 0 and a
    quadratic that is nonnegative on the interval."""
    if a <= 0.0:
        # constant along the segment direction
        return math.sqrt(max(c, 0.0)) * (x1 - x0)
    h = -b / (2.0 * a)
    m = c - b * b / (4.0 * a)  # minimum value of the quadratic
    sa = math.sqrt(a)
    if m <= 1e-15 * max(1.0, abs(c)):
        # the segment line passes through the center: sqrt(a) * |x - h|
        def prim(x):
            t = x - h
            return sa * math.copysign(t * t, t) / 2.0

        return prim(x1) - prim(x0)

    def prim(x):
        t = x - h
        val = math.sqrt(a * t * t + m)
        return 0.5 * (t * val + (m / sa) * math.asinh(t * sa / math.sqrt(m)))

    return prim(x1) - prim(x0)


def segment_loss_exact(q: CenterSet, lip: LipSpec, s: Segment) -> float:
    """Closed-form integral over [0,1] of the lifted distance along ``s``.

    Supported for the identity transform and the squared transform
    (power with r=2); other kinds raise UnsupportedLipError and callers
    fall back to a numerical oracle.
    """
    _check_dims(q, s.d)
    squared = lip.kind == "power" and lip.r == 2.0
    if not (squared or lip.kind == "identity"):
        raise UnsupportedLipError(
            f"no closed form for lip kind {lip.kind!r} (r={lip.r})"
        )
    if not np.any(s.v):
        return lifted_distance(q, lip, s.u)

    a, b, c = _weighted_sq_coeffs(s, q)
    xs = [0.0] + nearest_center_breakpoints(s, q) + [1.0]
    total = 0.0
    for x0, x1 in zip(xs[:-1], xs[1:]):
        if x1 <= x0:
            continue
        mid = 0.5 * (x0 + x1)
        vals = (a * mid + b) * mid + c
        j = int(np.argmin(vals))
        if squared:
            total += (
                a[j] * (x1**3 - x0**3) / 3.0
                + b[j] * (x1**2 - x0**2) / 2.0
                + c[j] * (x1 - x0)
            )
        else:
            w = float(q.center_weights[j])
            if w == 0.0:
                continue
            # integrate w * sqrt(unweighted quadratic) = sqrt(weighted quadratic)
            total += _integral_sqrt_quadratic(
                a[j] / w**2, b[j] / w**2, c[j] / w**2, x0, x1
            ) * w
    return float(total)


def set_loss(q: CenterSet, lip: LipSpec, L: Sequence[Segment]) -> float:
    """Sum of per-segment losses; exact where a closed form exists, else the
    adaptive-quadrature oracle."""
    total = 0.0
    for s in L:
        try:
            total += segment_loss_exact(q, lip, s)
        except UnsupportedLipError:
            from .oracle import quadrature_loss

            total += quadrature_loss(s, q, lip, tol=1e-10)
    return total
