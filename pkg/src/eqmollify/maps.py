"""Affine charts, orthogonal group actions and smooth chart cutoffs.

Small map objects with a shared protocol: ``apply`` sends a batch of points
(N, n) to their images, ``jacobian`` returns the (N, n, n) derivatives.
Everything here is affine, so Jacobians are constant per map; the nonlinear
shift maps live in ``ballmap``.
"""

from dataclasses import dataclass, field

import numpy as np

from .ballmap import smooth_step

__all__ = [
    "GroupError",
    "LinearMap",
    "AffineChart",
    "ChartCutoff",
    "GroupAction",
    "cyclic_rotation_group",
    "trivial_group",
    "torus_group",
]


class GroupError(ValueError):
    """A purported group action fails closure, orthogonality or invariance."""


@dataclass(frozen=True)
class LinearMap:
    """x -> A x with constant Jacobian A."""

    matrix: np.ndarray

    def __init__(self, matrix):
        object.__setattr__(self, "matrix", np.asarray(matrix, dtype=float))

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.matrix.T

    def jacobian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.broadcast_to(self.matrix, (x.shape[0],) + self.matrix.shape).copy()

    def inverse(self):
        return LinearMap(np.linalg.inv(self.matrix))


@dataclass(frozen=True)
class AffineChart:
    """Chart map u = A (x - center) from a neighborhood onto the unit ball.

    ``apply`` goes to chart coordinates, ``apply_inverse`` back.  The chart
    domain (where |u| < 1) is the preimage of the open unit ball.
    """

    matrix: np.ndarray
    center: np.ndarray

    def __init__(self, matrix, center):
        object.__setattr__(self, "matrix", np.asarray(matrix, dtype=float))
        object.__setattr__(self, "center", np.asarray(center, dtype=float))

    @classmethod
    def scaled(cls, center, radius):
        """Chart sending the ball B(center, radius) onto the unit ball."""
        center = np.asarray(center, dtype=float)
        n = center.shape[0]
        return cls(np.eye(n) / float(radius), center)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        return (x - self.center) @ self.matrix.T

    def apply_inverse(self, u):
        u = np.asarray(u, dtype=float)
        inv = np.linalg.inv(self.matrix)
        return u @ inv.T + self.center

    def jacobian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.broadcast_to(self.matrix, (x.shape[0],) + self.matrix.shape).copy()

    def jacobian_inverse(self):
        return np.linalg.inv(self.matrix)

    def chart_radius(self, x):
        """Norm of the chart image; < 1 inside the chart domain."""
        u = self.apply(np.atleast_2d(np.asarray(x, dtype=float)))
        return np.linalg.norm(u, axis=1)


@dataclass(frozen=True)
class ChartCutoff:
    """Smooth bump subordinate to a chart: 1 inside the inner chart ball,
    0 outside the chart domain, a smooth radial step between.

    The profile is exactly one for chart radius <= inner and exactly zero for
    chart radius >= outer; localized currents and metrics split along it.
    """

    chart: AffineChart
    inner: float = 0.5
    outer: float = 1.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 1
        rho = self.chart.chart_radius(np.atleast_2d(x))
        vals = smooth_step((self.outer - rho) / (self.outer - self.inner))
        vals = np.atleast_1d(vals)
        return float(vals[0]) if scalar else vals

    def __call__(self, x):
        return self.value(x)


def _check_orthogonal(matrices, tol):
    n = matrices.shape[1]
    eye = np.eye(n)
    for m in matrices:
        if np.max(np.abs(m.T @ m - eye)) > tol:
            raise GroupError("group element is not orthogonal within %g" % tol)


def _check_closure(matrices, tol):
    for a in matrices:
        for b in matrices:
            prod = a @ b
            best = min(np.max(np.abs(prod - c)) for c in matrices)
            if best > tol:
                raise GroupError("group is not closed under products within %g" % tol)


@dataclass(frozen=True)
class GroupAction:
    """A compact group of orthogonal matrices with averaging weights.

    Finite groups carry uniform weights 1/|G|.  A torus (full rotation group
    in the plane) is represented by its periodic quadrature: N equispaced
    angles with uniform weights, flagged by ``is_quadrature`` since the node
    set only approximates the group.
    """

    matrices: np.ndarray
    weights: np.ndarray
    is_quadrature: bool = False

    def __init__(self, matrices, weights=None, is_quadrature=False, check=True, tol=1e-12):
        matrices = np.asarray(matrices, dtype=float)
        if weights is None:
            weights = np.full(matrices.shape[0], 1.0 / matrices.shape[0])
        weights = np.asarray(weights, dtype=float)
        if check:
            _check_orthogonal(matrices, tol)
            if not is_quadrature:
                _check_closure(matrices, tol)
            if abs(float(np.sum(weights)) - 1.0) > 1e-12:
                raise GroupError("averaging weights must sum to one")
        object.__setattr__(self, "matrices", matrices)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "is_quadrature", bool(is_quadrature))

    def __len__(self):
        return self.matrices.shape[0]

    def __iter__(self):
        return iter(self.matrices)


def trivial_group(dimension):
    return GroupAction(np.eye(int(dimension))[None, :, :])


def cyclic_rotation_group(order, dimension=2):
    """Rotations by multiples of 2 pi / order in the plane.

    Elements are built by repeated multiplication of the generator so the
    set is closed under products up to accumulated rounding only.
    """
    if dimension != 2:
        raise GroupError("cyclic rotations are built in the plane")
    k = int(order)
    angle = 2.0 * np.pi / k
    gen = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    # quarter-turn subgroups are exact in floats; snap tiny entries so that
    # products reproduce elements bit for bit
    if k in (1, 2, 4):
        gen = np.round(gen)
    mats = [np.eye(2)]
    for _ in range(k - 1):
        mats.append(gen @ mats[-1])
    return GroupAction(np.array(mats), tol=1e-10)


def torus_group(nodes=64):
    """Equispaced-angle quadrature of the planar rotation group."""
    n = int(nodes)
    angles = 2.0 * np.pi * np.arange(n) / n
    mats = np.empty((n, 2, 2))
    mats[:, 0, 0] = np.cos(angles)
    mats[:, 0, 1] = -np.sin(angles)
    mats[:, 1, 0] = np.sin(angles)
    mats[:, 1, 1] = np.cos(angles)
    return GroupAction(mats, is_quadrature=True)
