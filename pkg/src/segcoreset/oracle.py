"""Ground-truth loss evaluation.

Two independent numerical routes used by the validation suites: a dense
uniform-grid discretization (streamed, never materialized) and adaptive
Simpson quadrature with Richardson error control for transforms without a
closed form.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InvalidParameterError, QuadratureError
from .geometry import CenterSet, LipSpec, Segment, lifted_distances, nearest_center_breakpoints

__all__ = ["dense_segment_loss", "dense_loss", "quadrature_loss"]

_CHUNK = 1 << 17
_MAX_DEPTH = 60


def dense_segment_loss(
    s: Segment, q: CenterSet, lip: LipSpec, points_per_segment: int
) -> float:
    """Grid sum (1/(m-1)) * sum_{i=0}^{m-1} D(q, s(i/(m-1))) on m points."""
    if points_per_segment < 2:
        raise InvalidParameterError("points_per_segment must be >= 2")
    n = points_per_segment - 1
    total = 0.0
    for lo in range(0, n + 1, _CHUNK):
        hi = min(lo + _CHUNK, n + 1)
        x = np.arange(lo, hi, dtype=float) / n
        total += float(lifted_distances(q, lip, s.point_at(x)).sum())
    return total / n


def dense_loss(
    L: Sequence[Segment],
    q: CenterSet,
    lip: LipSpec,
    points_per_segment: int = 10_000,
    mse: bool = False,
) -> float:
    """Dense-grid loss over a set of segments.

    Default mode returns the weighted Riemann sum approximating the loss
    integral.  With ``mse=True`` the raw per-point distances are averaged
    over the total number of grid points instead (the mean-squared-error
    convention when used with the squared transform).
    """
    if not L:
        return 0.0
    if mse:
        total = 0.0
        count = 0
        for s in L:
            n = points_per_segment - 1
            for lo in range(0, n + 1, _CHUNK):
                hi = min(lo + _CHUNK, n + 1)
                x = np.arange(lo, hi, dtype=float) / n
                total += float(lifted_distances(q, lip, s.point_at(x)).sum())
            count += points_per_segment
        return total / count
    return sum(dense_segment_loss(s, q, lip, points_per_segment) for s in L)


def quadrature_loss(s: Segment, q: CenterSet, lip: LipSpec, tol: float = 1e-8) -> float:
    """Adaptive-Simpson integral of the lifted distance along the segment.

    Subdivides until the local Richardson estimate is below the tolerance;
    the kinks of the min-over-centers integrand are absorbed by recursive
    splitting.  Raises QuadratureError beyond the depth limit.
    """
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")

    def f(x: float) -> float:
        return float(lifted_distances(q, lip, s.point_at(np.array([x])))[0])

    def simpson(fa: float, fm: float, fb: float, h: float) -> float:
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        if depth > _MAX_DEPTH:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] after depth {_MAX_DEPTH}"
            )
        m = 0.5 * (a + b)
        flm = f(0.5 * (a + m))
        frm = f(0.5 * (m + b))
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        err = (left + right - whole) / 15.0
        # a minimum depth keeps kinks of the integrand from fooling the
        # smoothness-based error estimate on wide intervals
        if abs(err) <= tol and depth >= 3:
            return left + right + err
        return recurse(a, m, fa, flm, fm, left, tol / 2.0, depth + 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2.0, depth + 1
        )

    # split where the minimizing center changes; the minimizer under any
    # monotone transform is the minimizer of the weighted distance itself
    knots = [0.0] + nearest_center_breakpoints(s, q) + [1.0]
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        if b <= a:
            continue
        fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
        whole = simpson(fa, fm, fb, b - a)
        total += recurse(a, b, fa, fm, fb, whole, tol * (b - a), 0)
    return total
