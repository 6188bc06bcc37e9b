"""Christoffel symbols, sectional curvature, and curvature bound scans.

Both derivative modes share one algebraic core: the Christoffel symbols
and their derivatives are functions of the 2-jet (g, dg, d2g), and only
the jet acquisition differs.  Analytic jets come from the field's own
derivative callables; finite-difference jets from a 13-point (in two
dimensions) central stencil evaluated in one batch, which matters when the
field being measured is itself a quadrature.
"""

from dataclasses import dataclass

import numpy as np

from .metrics import BoxGrid, MetricError

__all__ = [
    "CurvatureError",
    "christoffel",
    "sectional_curvature",
    "CurvatureBounds",
    "curvature_bounds",
    "BoundsComparison",
    "bounds_comparison",
]


class CurvatureError(RuntimeError):
    """Degenerate section, missing derivatives, or an empty scan."""


def _finite_difference_jet(metric, points, step):
    n = metric.dimension
    count = points.shape[0]
    offsets = [np.zeros(n)]
    for a in range(n):
        e = np.zeros(n)
        e[a] = step
        offsets.append(e)
        offsets.append(-e)
    crosses = []
    for a in range(n):
        for b in range(a + 1, n):
            ea, eb = np.zeros(n), np.zeros(n)
            ea[a], eb[b] = step, step
            for sa in (1.0, -1.0):
                for sb in (1.0, -1.0):
                    offsets.append(sa * ea + sb * eb)
                    crosses.append((a, b, sa, sb))
    stencil = np.asarray(offsets)
    batch = (points[:, None, :] + stencil[None, :, :]).reshape(-1, n)
    values = metric.value(batch).reshape(count, stencil.shape[0], n, n)
    g0 = values[:, 0]
    dg = np.empty((count, n, n, n))
    d2g = np.empty((count, n, n, n, n))
    for a in range(n):
        plus, minus = values[:, 1 + 2 * a], values[:, 2 + 2 * a]
        dg[:, a] = (plus - minus) / (2.0 * step)
        d2g[:, a, a] = (plus - 2.0 * g0 + minus) / step**2
    base = 1 + 2 * n
    for index, (a, b, sa, sb) in enumerate(crosses):
        if sa == 1.0 and sb == 1.0:
            pp = values[:, base + index]
            pm = values[:, base + index + 1]
            mp = values[:, base + index + 2]
            mm = values[:, base + index + 3]
            mixed = (pp - pm - mp + mm) / (4.0 * step**2)
            d2g[:, a, b] = mixed
            d2g[:, b, a] = mixed
    return g0, dg, d2g


def _metric_jet(metric, points, mode="auto", step=None):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    analytic = metric.first_derivative is not None and metric.second_derivative is not None
    if mode == "analytic" and not analytic:
        raise CurvatureError("metric has no analytic derivatives")
    if mode not in ("auto", "analytic", "fd"):
        raise CurvatureError("unknown derivative mode %r" % mode)
    if analytic and mode != "fd":
        return (
            metric.value(points),
            np.asarray(metric.first_derivative(points), dtype=float),
            np.asarray(metric.second_derivative(points), dtype=float),
        )
    return _finite_difference_jet(metric, points, step or metric.fd_step)


def _christoffel_terms(g, dg, d2g=None):
    ginv = np.linalg.inv(g)
    # T[r, l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    lowered = (
        np.transpose(dg, (0, 3, 1, 2))
        + np.transpose(dg, (0, 3, 2, 1))
        - dg
    )
    gamma = 0.5 * np.einsum("rkl,rlij->rkij", ginv, lowered)
    if d2g is None:
        return gamma, None
    dginv = -np.einsum("rkm,rcmp,rpl->rckl", ginv, dg, ginv)
    dlowered = (
        np.transpose(d2g, (0, 1, 4, 2, 3))
        + np.transpose(d2g, (0, 1, 4, 3, 2))
        - d2g
    )
    dgamma = 0.5 * (
        np.einsum("rckl,rlij->rckij", dginv, lowered)
        + np.einsum("rkl,rclij->rckij", ginv, dlowered)
    )
    return gamma, dgamma


def christoffel(metric, points, mode="auto", step=None):
    """Connection coefficients, indexed [point, upper, lower, lower]."""
    g, dg, _ = _metric_jet(metric, points, mode=mode, step=step)
    gamma, _ = _christoffel_terms(g, dg)
    return gamma


def _lowered_curvature(metric, points, mode, step):
    g, dg, d2g = _metric_jet(metric, points, mode=mode, step=step)
    gamma, dgamma = _christoffel_terms(g, dg, d2g)
    upper = (
        np.einsum("rkmlj->rmjkl", dgamma)
        - np.einsum("rlmkj->rmjkl", dgamma)
        + np.einsum("rmks,rslj->rmjkl", gamma, gamma)
        - np.einsum("rmls,rskj->rmjkl", gamma, gamma)
    )
    return g, np.einsum("rim,rmjkl->rijkl", g, upper)


def _section_values(g, lowered, x_vectors, y_vectors):
    # <R(X, Y) Y, X> with slots (paired, transported, X, Y)
    numerator = np.einsum("rijkl,ri,rj,rk,rl->r", lowered,
                          x_vectors, y_vectors, x_vectors, y_vectors)
    xx = np.einsum("rij,ri,rj->r", g, x_vectors, x_vectors)
    yy = np.einsum("rij,ri,rj->r", g, y_vectors, y_vectors)
    xy = np.einsum("rij,ri,rj->r", g, x_vectors, y_vectors)
    gram = xx * yy - xy**2
    scale = np.maximum(xx * yy, 1e-300)
    if np.any(gram <= 1e-10 * scale):
        raise CurvatureError("degenerate section: spanning pair nearly dependent")
    return numerator / gram


def sectional_curvature(metric, points, x_vectors, y_vectors, mode="auto", step=None):
    """Curvature of the plane spanned by each (X, Y) pair.

    The Gram denominator normalizes arbitrary spanning pairs; a nearly
    dependent pair is rejected rather than amplified.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x_vectors = np.atleast_2d(np.asarray(x_vectors, dtype=float))
    y_vectors = np.atleast_2d(np.asarray(y_vectors, dtype=float))
    g, lowered = _lowered_curvature(metric, points, mode, step)
    return _section_values(g, lowered, x_vectors, y_vectors)


@dataclass(frozen=True)
class CurvatureBounds:
    lower: float
    upper: float
    lower_point: np.ndarray
    upper_point: np.ndarray
    point_count: int
    section_count: int
    seed: int


def curvature_bounds(metric, grid, sections=8, seed=42, mode="auto", step=None,
                     mask_radius=None, exclusion_radii=(), exclusion_width=None):
    """Extremes of sectional curvature over grid points and random planes.

    Points within ``exclusion_width`` (default twice the derivative step)
    of a declared discontinuity sphere are excised, as are points outside
    ``mask_radius`` when one is given.  Sections are drawn once per run
    from the seed by QR-orthonormalizing Gaussian pairs, so the scan is
    reproducible and, in two dimensions, doubles as a consistency check:
    every pair spans the same plane.
    """
    if not isinstance(grid, BoxGrid):
        raise MetricError("curvature scan expects a BoxGrid")
    points = grid.points()
    if mask_radius is not None:
        points = points[np.linalg.norm(points, axis=1) <= mask_radius]
    radii = tuple(exclusion_radii) + tuple(getattr(metric, "discontinuity_radii", ()))
    width = exclusion_width
    if width is None:
        width = 2.0 * (step or metric.fd_step)
    for radius in radii:
        points = points[np.abs(np.linalg.norm(points, axis=1) - radius) >= width]
    if points.shape[0] == 0:
        raise CurvatureError("no grid points survive the exclusions")
    n = metric.dimension
    rng = np.random.default_rng(seed)
    lower = np.inf
    upper = -np.inf
    lower_point = upper_point = points[0]
    # one jet evaluation serves every section; only the plane draw varies
    g, lowered = _lowered_curvature(metric, points, mode, step)
    for _ in range(sections):
        frames = np.linalg.qr(rng.standard_normal((points.shape[0], n, 2)))[0]
        k = _section_values(g, lowered, frames[:, :, 0], frames[:, :, 1])
        lo, hi = int(np.argmin(k)), int(np.argmax(k))
        if k[lo] < lower:
            lower, lower_point = float(k[lo]), points[lo]
        if k[hi] > upper:
            upper, upper_point = float(k[hi]), points[hi]
    return CurvatureBounds(lower, upper, lower_point, upper_point,
                           points.shape[0], sections, seed)


@dataclass(frozen=True)
class BoundsComparison:
    lower_gap: float
    upper_gap: float
    tolerance: float

    @property
    def passed(self):
        return self.lower_gap <= self.tolerance and self.upper_gap <= self.tolerance


def bounds_comparison(measured, declared, tolerance=0.05):
    """Gap between a measured scan and declared (lower, upper) bounds."""
    lo, hi = float(declared[0]), float(declared[1])
    return BoundsComparison(
        lower_gap=abs(measured.lower - lo),
        upper_gap=abs(measured.upper - hi),
        tolerance=float(tolerance),
    )
