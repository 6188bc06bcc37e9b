"""Finitely represented currents and their mollification.

A current of degree m is paired weakly with compactly supported test forms.
Every pairing here reduces to a weighted sample: points, tangent frames and
weights such that T(w) = sum_k weight_k * w(point_k; frame_k).  Pushforwards
are then realized as pullbacks on forms, which at the sample level means
mapping the points and multiplying the frames by Jacobians.  This is exact
for the pairing and never re-meshes geometry under the nonlinear shifts.

Two smoothing operators act on a current: translation smoothing averages the
pushforwards under tau_y over the mollifier ball, and shift smoothing uses
the ball-preserving maps from ``ballmap`` instead, so the open unit ball is
mapped to itself and everything outside is left untouched.  The equivariant
operator splits the current with a chart cutoff, smooths the chart part by
shifts in chart coordinates and averages the result over a group of
orthogonal matrices.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .ballmap import shift_with_jacobian
from .maps import AffineChart, GroupAction, smooth_step

__all__ = [
    "CurrentError",
    "TestForm",
    "WeightedSample",
    "DiracCurrent",
    "PolyhedralCurrent",
    "CombinedCurrent",
    "evaluate",
    "pushforward_pairing",
    "mollified_sample",
    "smooth_by_translation",
    "smooth_by_shift",
    "localize",
    "equivariant_sample",
    "equivariant_smooth",
    "invariance_residual",
]

# row cap for the (kernel node x sample point) product batches
_MAX_ROWS = 1 << 20


class CurrentError(ValueError):
    """Degree or dimension mismatch, or degenerate current data."""


def _gauss_panels(panels, order):
    """Nodes and weights of a composite Gauss rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    width = 1.0 / panels
    starts = width * np.arange(panels)
    nodes = (starts[:, None] + 0.5 * width * (x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * width * w, panels)
    return nodes, weights


@dataclass(frozen=True)
class TestForm:
    """Compactly supported smooth m-form with polynomial-style coefficients.

    ``coefficients`` maps increasing multi-indices (tuples of axis numbers)
    to callables on point batches.  The whole form is multiplied by a smooth
    radial cutoff that is exactly one for |x| <= flat_radius and exactly
    zero for |x| >= support_radius, so pairings with far-away currents
    vanish as sums of exact zeros, not merely small numbers.
    """

    degree: int
    dimension: int
    coefficients: dict
    support_radius: float
    flat_radius: float = None
    center: np.ndarray = None

    # not a test case, despite what collectors assume about the name
    __test__ = False

    def __post_init__(self):
        if not 0 <= self.degree <= self.dimension:
            raise CurrentError("form degree must lie between 0 and the dimension")
        if self.flat_radius is None:
            object.__setattr__(self, "flat_radius", 0.5 * self.support_radius)
        if self.center is None:
            object.__setattr__(self, "center", np.zeros(self.dimension))
        else:
            object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not 0.0 < self.flat_radius < self.support_radius:
            raise CurrentError("need 0 < flat_radius < support_radius")
        for index in self.coefficients:
            if len(index) != self.degree:
                raise CurrentError("multi-index %r does not match degree %d" % (index, self.degree))
            if list(index) != sorted(set(index)):
                raise CurrentError("multi-index %r is not strictly increasing" % (index,))
            if index and (index[0] < 0 or index[-1] >= self.dimension):
                raise CurrentError("multi-index %r leaves dimension %d" % (index, self.dimension))

    def cutoff(self, points):
        radii = np.linalg.norm(np.atleast_2d(points) - self.center, axis=1)
        return smooth_step((self.support_radius - radii) / (self.support_radius - self.flat_radius))

    def evaluate(self, points, frames=None):
        """Batched w(x; v_1, ..., v_m): points (N, n), frames (N, m, n)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        count = points.shape[0]
        bump = self.cutoff(points)
        out = np.zeros(count)
        live = bump > 0.0
        if not np.any(live) or not self.coefficients:
            return out
        pts = points[live]
        if self.degree > 0:
            frames = np.asarray(frames, dtype=float)[live]
        total = np.zeros(pts.shape[0])
        for index, fn in self.coefficients.items():
            coef = np.asarray(fn(pts), dtype=float)
            if self.degree == 0:
                total += coef
            elif self.degree == 1:
                total += coef * frames[:, 0, index[0]]
            else:
                total += coef * np.linalg.det(frames[:, :, list(index)])
        out[live] = bump[live] * total
        return out


@dataclass(frozen=True)
class WeightedSample:
    """Discrete pairing data: T(w) = sum_k weights_k * w(points_k; frames_k)."""

    points: np.ndarray
    frames: np.ndarray
    weights: np.ndarray

    @property
    def degree(self):
        return self.frames.shape[1]

    @property
    def dimension(self):
        return self.points.shape[1]

    def pair(self, form):
        if form.degree != self.degree:
            raise CurrentError("form degree %d != current degree %d" % (form.degree, self.degree))
        if form.dimension != self.dimension:
            raise CurrentError("ambient dimensions differ")
        if self.points.shape[0] == 0:
            return 0.0
        return float(np.dot(self.weights, form.evaluate(self.points, self.frames)))

    def pair_many(self, forms):
        return np.array([self.pair(form) for form in forms])

    def pushforward(self, mapping):
        """Sample of the pushforward under a map with .apply and .jacobian."""
        if self.points.shape[0] == 0:
            return self
        moved = mapping.apply(self.points)
        jac = mapping.jacobian(self.points)
        frames = np.einsum("kij,kaj->kai", jac, self.frames)
        return WeightedSample(moved, frames, self.weights)

    def rotated(self, matrix, weight=1.0):
        matrix = np.asarray(matrix, dtype=float)
        return WeightedSample(
            self.points @ matrix.T, self.frames @ matrix.T, self.weights * weight
        )

    def scaled(self, factor):
        return WeightedSample(self.points, self.frames, self.weights * float(factor))

    @staticmethod
    def concatenate(samples):
        samples = [s for s in samples if s.points.shape[0] > 0]
        if not samples:
            raise CurrentError("cannot concatenate empty sample list")
        return WeightedSample(
            np.concatenate([s.points for s in samples]),
            np.concatenate([s.frames for s in samples]),
            np.concatenate([s.weights for s in samples]),
        )


def _empty_sample(dimension, degree):
    return WeightedSample(
        np.zeros((0, dimension)), np.zeros((0, degree, dimension)), np.zeros(0)
    )


@dataclass(frozen=True)
class DiracCurrent:
    """Weighted point masses, each carrying an ordered m-frame (empty for m=0)."""

    points: np.ndarray
    weights: np.ndarray
    frames: np.ndarray

    def __init__(self, points, weights=None, frames=None):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        count, dim = points.shape
        if weights is None:
            weights = np.ones(count)
        weights = np.asarray(weights, dtype=float)
        if frames is None:
            frames = np.zeros((count, 0, dim))
        frames = np.asarray(frames, dtype=float)
        if frames.shape[0] != count or frames.shape[2] != dim:
            raise CurrentError("frame stack must be (points, degree, dimension)")
        m = frames.shape[1]
        if m > dim:
            raise CurrentError("degree exceeds ambient dimension")
        if m > 0:
            for fr in frames:
                if np.linalg.matrix_rank(fr) < m:
                    raise CurrentError("frame does not span an m-plane")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "frames", frames)

    @property
    def degree(self):
        return self.frames.shape[1]

    @property
    def dimension(self):
        return self.points.shape[1]

    def sample(self):
        return WeightedSample(self.points, self.frames, self.weights)

    def support_min_radius(self):
        if self.points.shape[0] == 0:
            return np.inf
        return float(np.min(np.linalg.norm(self.points, axis=1)))


def _segment_min_radius(a, b):
    # distance from the origin to the segment [a, b]
    d = b - a
    denom = float(np.dot(d, d))
    t = 0.0 if denom == 0.0 else min(1.0, max(0.0, -float(np.dot(a, d)) / denom))
    return float(np.linalg.norm(a + t * d))


def _triangle_min_radius(v0, v1, v2):
    edges = np.stack([v1 - v0, v2 - v0])
    coeffs, *_ = np.linalg.lstsq(edges @ edges.T, -edges @ v0, rcond=None)
    if coeffs[0] >= 0 and coeffs[1] >= 0 and coeffs.sum() <= 1:
        return float(np.linalg.norm(v0 + coeffs @ edges))
    return min(
        _segment_min_radius(v0, v1),
        _segment_min_radius(v0, v2),
        _segment_min_radius(v1, v2),
    )


@dataclass(frozen=True)
class PolyhedralCurrent:
    """Oriented m-simplices with multiplicities and an optional scalar weight.

    The pairing integrates the form against the constant edge frame of each
    simplex over barycentric parameters, with a composite Gauss rule per
    simplex (tensorized through a collapsed square for triangles).  The
    optional ``weight_fn`` multiplies the integrand pointwise; localization
    uses it to carry chart bumps.
    """

    simplices: np.ndarray
    multiplicities: np.ndarray
    weight_fn: object = None
    panels: int = 8
    order: int = 10

    def __init__(self, simplices, multiplicities=None, weight_fn=None, panels=8, order=10):
        simplices = np.asarray(simplices, dtype=float)
        if simplices.ndim != 3:
            raise CurrentError("simplices must be (count, degree + 1, dimension)")
        count = simplices.shape[0]
        if multiplicities is None:
            multiplicities = np.ones(count)
        multiplicities = np.asarray(multiplicities, dtype=float)
        m = simplices.shape[1] - 1
        if not 1 <= m <= simplices.shape[2]:
            raise CurrentError("simplex degree must lie in [1, dimension]")
        if m > 2:
            raise CurrentError("only segment and triangle simplices are supported")
        for sim in simplices:
            edges = sim[1:] - sim[0]
            if np.linalg.svd(edges, compute_uv=False)[-1] <= 1e-12:
                raise CurrentError("degenerate simplex with vanishing m-volume")
        object.__setattr__(self, "simplices", simplices)
        object.__setattr__(self, "multiplicities", multiplicities)
        object.__setattr__(self, "weight_fn", weight_fn)
        object.__setattr__(self, "panels", int(panels))
        object.__setattr__(self, "order", int(order))

    @property
    def degree(self):
        return self.simplices.shape[1] - 1

    @property
    def dimension(self):
        return self.simplices.shape[2]

    @cached_property
    def _sample(self):
        count = self.simplices.shape[0]
        if count == 0:
            return _empty_sample(self.dimension, self.degree)
        base, roots = self.simplices[:, 0, :], self.simplices[:, 1:, :]
        edges = roots - base[:, None, :]
        t, w = _gauss_panels(self.panels, self.order)
        if self.degree == 1:
            params = t[None, :, None]
            node_w = w
        else:
            # collapsed-square map of the unit square onto the triangle
            u, v = np.meshgrid(t, t, indexing="ij")
            params = np.stack([u.ravel(), (v * (1.0 - u)).ravel()], axis=1)[None, :, :]
            node_w = (np.outer(w, w) * (1.0 - u)).ravel()
        pts = base[:, None, :] + np.einsum("sqm,smn->sqn", np.broadcast_to(params, (count,) + params.shape[1:]), edges)
        q = pts.shape[1]
        frames = np.broadcast_to(edges[:, None, :, :], (count, q, self.degree, self.dimension))
        weights = self.multiplicities[:, None] * node_w[None, :]
        pts = pts.reshape(-1, self.dimension)
        frames = frames.reshape(-1, self.degree, self.dimension)
        weights = weights.ravel()
        if self.weight_fn is not None:
            weights = weights * np.asarray(self.weight_fn(pts), dtype=float)
        return WeightedSample(pts, frames, weights)

    def sample(self):
        return self._sample

    def support_min_radius(self):
        if self.simplices.shape[0] == 0:
            return np.inf
        if self.degree == 1:
            return min(_segment_min_radius(s[0], s[1]) for s in self.simplices)
        return min(_triangle_min_radius(*s) for s in self.simplices)


@dataclass(frozen=True)
class CombinedCurrent:
    """Formal sum of currents of matching degree and dimension."""

    parts: tuple

    def __init__(self, parts):
        parts = tuple(parts)
        if not parts:
            raise CurrentError("combined current needs at least one part")
        degrees = {p.degree for p in parts}
        dims = {p.dimension for p in parts}
        if len(degrees) > 1 or len(dims) > 1:
            raise CurrentError("combined parts must share degree and dimension")
        object.__setattr__(self, "parts", parts)

    @property
    def degree(self):
        return self.parts[0].degree

    @property
    def dimension(self):
        return self.parts[0].dimension

    def sample(self):
        samples = [p.sample() for p in self.parts]
        if all(s.points.shape[0] == 0 for s in samples):
            return _empty_sample(self.dimension, self.degree)
        return WeightedSample.concatenate(samples)

    def support_min_radius(self):
        return min(p.support_min_radius() for p in self.parts)


def evaluate(current, form):
    """The pairing T(w)."""
    return current.sample().pair(form)


def pushforward_pairing(current, mapping, form):
    """Pairing of the pushforward of T under a differentiable map, taken
    weakly: the sample is mapped and its frames multiplied by Jacobians."""
    return current.sample().pushforward(mapping).pair(form)


def _translation_product(sample, kernel):
    nodes, node_w = kernel.convex_weights()
    rows = nodes.shape[0] * sample.points.shape[0]
    pts = (nodes[:, None, :] + sample.points[None, :, :]).reshape(rows, sample.dimension)
    frames = np.broadcast_to(
        sample.frames[None], (nodes.shape[0],) + sample.frames.shape
    ).reshape(rows, sample.degree, sample.dimension)
    weights = (node_w[:, None] * sample.weights[None, :]).ravel()
    return WeightedSample(pts, frames, weights)


def _shift_product(sample, kernel):
    nodes, node_w = kernel.convex_weights()
    k = sample.points.shape[0]
    m = nodes.shape[0]
    dim, deg = sample.dimension, sample.degree
    block = max(1, _MAX_ROWS // max(k, 1))
    pts_out = np.empty((m * k, dim))
    frames_out = np.empty((m * k, deg, dim))
    for j0 in range(0, m, block):
        j1 = min(j0 + block, m)
        rows = (j1 - j0) * k
        x = np.tile(sample.points, (j1 - j0, 1))
        y = np.repeat(nodes[j0:j1], k, axis=0)
        moved, jac = shift_with_jacobian(x, y)
        sl = slice(j0 * k, j0 * k + rows)
        pts_out[sl] = moved
        tiled = np.tile(sample.frames, (j1 - j0, 1, 1))
        frames_out[sl] = np.einsum("kij,kaj->kai", jac, tiled)
    weights = (node_w[:, None] * sample.weights[None, :]).ravel()
    return WeightedSample(pts_out, frames_out, weights)


def _iter_parts(current):
    if isinstance(current, CombinedCurrent):
        for part in current.parts:
            yield from _iter_parts(part)
    else:
        yield current


def mollified_sample(current, kernel, ball_shifts=False):
    """Sample of the smoothed current; pair it with any number of forms.

    With ``ball_shifts`` the averaging runs over the ball-preserving shift
    maps.  Parts supported outside the closed unit ball are then returned
    unsmoothed, which reproduces their pairings bit for bit: the shifts are
    already the identity well inside radius one.
    """
    if kernel.dimension != current.dimension:
        raise CurrentError("kernel dimension does not match the current")
    pieces = []
    for part in _iter_parts(current):
        sample = part.sample()
        if sample.points.shape[0] == 0:
            continue
        if ball_shifts and part.support_min_radius() >= 1.0:
            pieces.append(sample)
        elif ball_shifts:
            pieces.append(_shift_product(sample, kernel))
        else:
            pieces.append(_translation_product(sample, kernel))
    if not pieces:
        return _empty_sample(current.dimension, current.degree)
    return WeightedSample.concatenate(pieces)


def smooth_by_translation(current, form, kernel):
    """Mollification through translations: average of (tau_y)_* T over the
    kernel ball, paired with the form."""
    return mollified_sample(current, kernel, ball_shifts=False).pair(form)


def smooth_by_shift(current, form, kernel):
    """Mollification through ball-preserving shifts in place of translations."""
    return mollified_sample(current, kernel, ball_shifts=True).pair(form)


def _combine_weights(first, second):
    if first is None:
        return second
    if second is None:
        return first
    return lambda pts: np.asarray(first(pts), dtype=float) * np.asarray(second(pts), dtype=float)


def _segment_splits(chart, a, b, levels):
    """Parameters in (0, 1) where the chart radius of a + t(b - a) crosses
    the given levels.  The squared radius is an exact quadratic in t."""
    u0 = chart.apply(a)
    du = chart.apply(b) - u0
    qa = float(np.dot(du, du))
    qb = 2.0 * float(np.dot(u0, du))
    qc = float(np.dot(u0, u0))
    cuts = []
    for level in levels:
        roots = np.roots([qa, qb, qc - level * level]) if qa > 0 else []
        for root in roots:
            if abs(root.imag) < 1e-14 and 1e-12 < root.real < 1.0 - 1e-12:
                cuts.append(float(root.real))
    return sorted(cuts)


def localize(current, cutoff):
    """Split T into the part weighted by the chart bump and the remainder.

    Segments are subdivided at the exact parameters where they cross the
    bump's inner and outer levels, so pieces on the plateaus carry constant
    weight and only transitional pieces integrate the bump itself.  The two
    halves always pair back to T by construction.
    """
    if isinstance(current, CombinedCurrent):
        halves = [localize(part, cutoff) for part in current.parts]
        return (
            CombinedCurrent([h[0] for h in halves]),
            CombinedCurrent([h[1] for h in halves]),
        )
    if isinstance(current, DiracCurrent):
        h = np.atleast_1d(cutoff.value(current.points))
        inside = DiracCurrent(current.points, current.weights * h, current.frames)
        outside = DiracCurrent(current.points, current.weights * (1.0 - h), current.frames)
        return inside, outside
    if not isinstance(current, PolyhedralCurrent):
        raise CurrentError("cannot localize %r" % type(current).__name__)
    if current.degree != 1:
        # triangles are not subdivided; both halves integrate the bump
        inside = PolyhedralCurrent(
            current.simplices, current.multiplicities,
            _combine_weights(current.weight_fn, cutoff.value),
            current.panels, current.order,
        )
        outside = PolyhedralCurrent(
            current.simplices, current.multiplicities,
            _combine_weights(current.weight_fn, lambda pts: 1.0 - cutoff.value(pts)),
            current.panels, current.order,
        )
        return inside, outside

    plain_in, trans, plain_out = [], [], []
    mult_in, mult_trans, mult_out = [], [], []
    for sim, mult in zip(current.simplices, current.multiplicities):
        a, b = sim
        cuts = _segment_splits(cutoff.chart, a, b, (cutoff.inner, cutoff.outer))
        knots = [0.0] + cuts + [1.0]
        for t0, t1 in zip(knots[:-1], knots[1:]):
            piece = np.stack([a + t0 * (b - a), a + t1 * (b - a)])
            # the shortened edge frame already carries the factor t1 - t0
            weight = mult
            rho = float(cutoff.chart.chart_radius(piece.mean(axis=0))[0])
            if rho <= cutoff.inner:
                plain_in.append(piece)
                mult_in.append(weight)
            elif rho >= cutoff.outer:
                plain_out.append(piece)
                mult_out.append(weight)
            else:
                trans.append(piece)
                mult_trans.append(weight)

    def build(sims, mults, weight_fn):
        if not sims:
            return PolyhedralCurrent(
                np.zeros((0, 2, current.dimension)), np.zeros(0),
                None, current.panels, current.order,
            )
        return PolyhedralCurrent(
            np.array(sims), np.array(mults),
            _combine_weights(current.weight_fn, weight_fn),
            current.panels, current.order,
        )

    inside_parts = [build(plain_in, mult_in, None), build(trans, mult_trans, cutoff.value)]
    outside_parts = [
        build(plain_out, mult_out, None),
        build(trans, mult_trans, lambda pts: 1.0 - cutoff.value(pts)),
    ]
    return CombinedCurrent(inside_parts), CombinedCurrent(outside_parts)


def equivariant_sample(current, kernel, cutoff, group):
    """Sample of the group-averaged, chart-localized shift smoothing.

    The chart part is pushed into chart coordinates, smoothed by shifts in
    the unit ball, pushed back and averaged over the group together with
    the untouched remainder.
    """
    if not isinstance(group, GroupAction):
        raise CurrentError("group must be a GroupAction")
    inside, outside = localize(current, cutoff)
    chart = cutoff.chart
    pieces = []
    chart_sample = inside.sample()
    if chart_sample.points.shape[0] > 0:
        in_chart = chart_sample.pushforward(chart)
        smoothed = _shift_product(in_chart, kernel)
        back = smoothed.pushforward(_InverseChart(chart))
    else:
        back = None
    rest = outside.sample()
    for matrix, weight in zip(group.matrices, group.weights):
        if back is not None:
            pieces.append(back.rotated(matrix, weight))
        if rest.points.shape[0] > 0:
            pieces.append(rest.rotated(matrix, weight))
    if not pieces:
        return _empty_sample(current.dimension, current.degree)
    return WeightedSample.concatenate(pieces)


@dataclass(frozen=True)
class _InverseChart:
    chart: AffineChart

    def apply(self, x):
        return self.chart.apply_inverse(x)

    def jacobian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        inv = self.chart.jacobian_inverse()
        return np.broadcast_to(inv, (x.shape[0],) + inv.shape).copy()


def equivariant_smooth(current, form, kernel, cutoff, group,
                       check_forms=None, invariance_tolerance=1e-8):
    """Pairing of the equivariant smoothing with a form.

    When ``check_forms`` is given the input current must itself be invariant
    under the group on those forms; a residual above the tolerance raises,
    since the averaging construction assumes an invariant input.
    """
    if check_forms is not None:
        residual = invariance_residual(current, group, check_forms)
        if residual > invariance_tolerance:
            raise CurrentError(
                "input current is not group invariant (residual %.3e)" % residual
            )
    return equivariant_sample(current, kernel, cutoff, group).pair(form)


def invariance_residual(current, group, forms):
    """max over group elements and forms of |T(pullback of w) - T(w)|."""
    sample = current.sample()
    base = sample.pair_many(forms)
    worst = 0.0
    for matrix in group.matrices:
        rotated = sample.rotated(matrix)
        worst = max(worst, float(np.max(np.abs(rotated.pair_many(forms) - base))))
    return worst
