"""Metric mollification, chart smoothing, group averaging, seminorms.

The two mollified-matrix pins come from a continuum polar integral
(Gauss-Legendre times trapezoid, scripts/make_fixtures.py section
"metrics") that shares only the shift-map primitive with the library;
kernel rule, weight normalization and accumulation are all recomputed
there.  Exactness claims (locality, translation zone, strip overlap) are
asserted bit for bit or to a few ulp, not to loose tolerances.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqmollify.ballmap import R_IDENTITY
from eqmollify.kernel import MollifierKernel
from eqmollify.maps import AffineChart, ChartCutoff, GroupAction, LinearMap, cyclic_rotation_group, torus_group, trivial_group
from eqmollify.metrics import (
    BoxGrid,
    EpsilonSelector,
    GridCachedMetric,
    MetricError,
    MetricField,
    a_nu,
    chart_smooth_metric,
    compose_chart_stages,
    conformal_metric,
    constant_metric,
    default_level_schedule,
    haar_average_metric,
    isometry_residual,
    metric_invariance_residual,
    mollify_metric,
    pullback_metric,
    select_epsilon_for_k,
    seminorm_from_values,
    sobolev_seminorm,
)

# frozen oracle values, scripts/make_fixtures.py section "metrics"
MOLLIFIED_SPHERE = np.array(
    [[2.5924452528263147, -0.00064020841629925252],
     [-0.00064020841629925231, 2.5912893209635612]])
MOLLIFIED_RADIAL = np.array(
    [[1.048718093276428, 4.3846606150413689e-05],
     [4.3846606150413581e-05, 1.0485076295669193]])
SPHERE_POINT = np.array([0.45, -0.2])
RADIAL_POINT = np.array([0.5, 0.1])

KINK_T = 0.45**2
RADIAL_C0 = 1.0 + 0.3 * KINK_T - 0.5 * KINK_T**2
RADIAL_C1 = 0.3 - KINK_T


def sphere_factor(points):
    t = np.sum(points**2, axis=-1)
    return 4.0 / (1.0 + t) ** 2


def sphere_grad(points):
    t = np.sum(points**2, axis=-1)
    return (-16.0 / (1.0 + t) ** 3)[:, None] * points


def sphere_hessian(points):
    t = np.sum(points**2, axis=-1)
    outer = points[:, :, None] * points[:, None, :]
    return (96.0 / (1.0 + t) ** 4)[:, None, None] * outer + (
        -16.0 / (1.0 + t) ** 3
    )[:, None, None] * np.eye(points.shape[1])


def radial_factor(points):
    t = np.sum(points**2, axis=-1)
    inner = 1.0 + 0.3 * t - 0.5 * t**2
    outer = RADIAL_C0 + RADIAL_C1 * (t - KINK_T) + 0.8 * (t - KINK_T) ** 2
    return np.where(t <= KINK_T, inner, outer)


def sphere_metric():
    return conformal_metric(sphere_factor, grad=sphere_grad, hessian=sphere_hessian)


def radial_metric():
    return conformal_metric(radial_factor, regularity="c11",
                            discontinuity_radii=(0.45,))


def unit_chart_cutoff():
    return ChartCutoff(AffineChart.scaled([0.0, 0.0], 1.0))


class TestMetricField:
    def test_constant_metric_values_and_derivatives(self):
        m = np.array([[2.0, 0.3], [0.3, 1.0]])
        g = constant_metric(m)
        pts = np.array([[0.1, 0.2], [3.0, -1.0]])
        assert np.array_equal(g.value(pts), np.stack([m, m]))
        assert np.all(g.first_derivative(pts) == 0.0)
        assert np.all(g.second_derivative(pts) == 0.0)
        assert g.derivative_mode == "analytic"

    def test_check_spd_accepts_and_rejects(self):
        good = constant_metric(np.eye(2))
        assert good.check_spd(np.zeros((1, 2))) == 1.0
        bad = constant_metric(np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(MetricError, match="positive definite"):
            bad.check_spd(np.zeros((1, 2)))

    def test_conformal_analytic_derivatives_match_differences(self):
        g = sphere_metric()
        pts = np.array([[0.3, -0.1], [0.0, 0.55], [-0.62, 0.4]])
        h = 1e-6
        first = g.first_derivative(pts)
        for axis in range(2):
            step = np.zeros(2)
            step[axis] = h
            fd = (g.value(pts + step) - g.value(pts - step)) / (2.0 * h)
            assert np.max(np.abs(first[:, axis] - fd)) < 1e-7
        second = g.second_derivative(pts)
        for axis in range(2):
            step = np.zeros(2)
            step[axis] = h
            fd = (g.first_derivative(pts + step) - g.first_derivative(pts - step)) / (2.0 * h)
            assert np.max(np.abs(second[:, axis] - fd)) < 1e-6


class TestPullback:
    def test_rotation_congruence(self):
        theta = 0.7
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        m = np.array([[2.0, 0.5], [0.5, 1.0]])
        pulled = pullback_metric(constant_metric(m), LinearMap(rot))
        pts = np.array([[0.2, 0.1]])
        assert np.allclose(pulled.value(pts)[0], rot.T @ m @ rot, atol=1e-15)

    def test_linear_chain_keeps_analytic_mode(self):
        rot = LinearMap(np.array([[0.0, -1.0], [1.0, 0.0]]))
        pulled = pullback_metric(sphere_metric(), rot)
        assert pulled.derivative_mode == "analytic"
        pts = np.array([[0.25, -0.4], [0.1, 0.3]])
        h = 1e-6
        first = pulled.first_derivative(pts)
        for axis in range(2):
            step = np.zeros(2)
            step[axis] = h
            fd = (pulled.value(pts + step) - pulled.value(pts - step)) / (2.0 * h)
            assert np.max(np.abs(first[:, axis] - fd)) < 1e-7
        second = pulled.second_derivative(pts)
        fd00 = (pulled.first_derivative(pts + [h, 0]) - pulled.first_derivative(pts - [h, 0])) / (2.0 * h)
        assert np.max(np.abs(second[:, 0] - fd00)) < 1e-6

    def test_nonlinear_map_drops_to_differences(self):
        from eqmollify.ballmap import ShiftMap, shift_with_jacobian

        shift = ShiftMap(np.array([0.05, -0.02]))
        pulled = pullback_metric(sphere_metric(), shift)
        assert pulled.derivative_mode == "finite-difference"
        x = np.array([[0.5, 0.1]])
        moved, jac = shift_with_jacobian(x, np.array([0.05, -0.02]))
        expected = jac[0].T @ sphere_metric().value(moved)[0] @ jac[0]
        assert np.allclose(pulled.value(x)[0], expected, atol=1e-15)


class TestMollify:
    def test_identity_zone_is_bit_exact(self):
        g = sphere_metric()
        smoothed = mollify_metric(g, MollifierKernel.create(2, 0.2))
        pts = np.array([[0.85, 0.1], [1.3, -0.2], [-0.95, 0.4]])
        assert np.linalg.norm(pts, axis=1).min() > R_IDENTITY
        assert np.array_equal(smoothed.value(pts), g.value(pts))

    def test_translation_zone_preserves_constants(self):
        m = np.array([[2.0, 0.3], [0.3, 1.0]])
        smoothed = mollify_metric(constant_metric(m), MollifierKernel.create(2, 0.15))
        # only the convex-weight rounding survives here, a few ulp per entry
        pts = np.array([[0.1, 0.05], [0.0, 0.0], [-0.12, 0.08]])
        assert np.max(np.abs(smoothed.value(pts) - m)) < 1e-14

    def test_oracle_pin_sphere(self):
        smoothed = mollify_metric(sphere_metric(), MollifierKernel.create(2, 0.1, level=3))
        val = smoothed.value(SPHERE_POINT[None, :])[0]
        rel = np.max(np.abs(val - MOLLIFIED_SPHERE)) / np.max(np.abs(MOLLIFIED_SPHERE))
        assert rel < 1e-11

    def test_oracle_pin_radial_c11(self):
        smoothed = mollify_metric(radial_metric(), MollifierKernel.create(2, 0.1, level=3))
        val = smoothed.value(RADIAL_POINT[None, :])[0]
        rel = np.max(np.abs(val - MOLLIFIED_RADIAL)) / np.max(np.abs(MOLLIFIED_RADIAL))
        assert rel < 1e-11

    def test_coarse_rule_stays_close_to_oracle(self):
        smoothed = mollify_metric(sphere_metric(), MollifierKernel.create(2, 0.1, level=2))
        val = smoothed.value(SPHERE_POINT[None, :])[0]
        rel = np.max(np.abs(val - MOLLIFIED_SPHERE)) / np.max(np.abs(MOLLIFIED_SPHERE))
        assert rel < 1e-7

    def test_indefinite_input_aborts(self):
        bad = constant_metric(np.diag([1.0, -1.0]))
        smoothed = mollify_metric(bad, MollifierKernel.create(2, 0.1))
        with pytest.raises(MetricError, match="positive definiteness"):
            smoothed.value(np.array([[0.1, 0.0]]))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(MetricError, match="dimension"):
            mollify_metric(sphere_metric(), MollifierKernel.create(1, 0.1))

    def test_output_is_symmetric_spd(self):
        smoothed = mollify_metric(sphere_metric(), MollifierKernel.create(2, 0.2, level=2))
        ring = np.linspace(0.0, 2.0 * np.pi, 9)[:-1]
        pts = 0.5 * np.stack([np.cos(ring), np.sin(ring)], axis=1)
        vals = smoothed.value(pts)
        assert np.array_equal(vals, np.swapaxes(vals, 1, 2))
        assert np.min(np.linalg.eigvalsh(vals)) > 0.0


class TestChartSmoothing:
    def test_outside_chart_is_bit_exact(self):
        g = sphere_metric()
        smoothed = chart_smooth_metric(g, unit_chart_cutoff(), MollifierKernel.create(2, 0.15))
        pts = np.array([[1.0, 0.3], [-1.4, 0.0], [0.8, 0.8]])
        assert np.array_equal(smoothed.value(pts), g.value(pts))

    def test_plateau_translation_zone_reproduces_constants(self):
        m = np.array([[2.0, 0.3], [0.3, 1.0]])
        cutoff = ChartCutoff(AffineChart.scaled([0.25, 0.0], 2.0))
        smoothed = chart_smooth_metric(constant_metric(m), cutoff,
                                       MollifierKernel.create(2, 0.08, level=2))
        pts = np.array([[0.25, 0.0], [0.31, -0.04], [0.18, 0.05]])
        assert np.max(np.abs(smoothed.value(pts) - m)) < 1e-13

    def test_smooths_across_partition(self):
        # inside the transitional ring the two terms recombine to something
        # close to, but not equal to, the input
        g = constant_metric(np.eye(2))
        smoothed = chart_smooth_metric(g, unit_chart_cutoff(), MollifierKernel.create(2, 0.15, level=2))
        val = smoothed.value(np.array([[0.55, 0.0]]))[0]
        assert np.abs(val[0, 0] - 1.0) > 1e-8
        assert np.abs(val[0, 0] - 1.0) < 1e-2
        assert np.min(np.linalg.eigvalsh(val)) > 0.5


class TestHaarAverage:
    def test_finite_group_invariance_residual(self):
        cutoff = unit_chart_cutoff()
        kernel = MollifierKernel.create(2, 0.15, level=2)
        group = cyclic_rotation_group(4)
        probe = np.array([[0.45, 0.2], [0.7, 0.1], [-0.3, 0.55], [0.9, 0.3], [1.2, 0.4]])
        averaged = haar_average_metric(constant_metric(np.eye(2)), cutoff, kernel, group,
                                       isometry_points=probe)
        assert metric_invariance_residual(averaged, group, probe) <= 1e-10

    def test_sphere_octic_invariance_residual(self):
        cutoff = unit_chart_cutoff()
        kernel = MollifierKernel.create(2, 0.12, level=2)
        group = cyclic_rotation_group(8)
        probe = np.array([[0.5, 0.1], [0.05, -0.62], [0.33, 0.41]])
        averaged = haar_average_metric(sphere_metric(), cutoff, kernel, group,
                                       isometry_points=probe)
        assert metric_invariance_residual(averaged, group, probe) <= 1e-10

    def test_torus_quadrature_sizes_agree(self):
        cutoff = unit_chart_cutoff()
        kernel = MollifierKernel.create(2, 0.1, level=2)
        pts = np.array([[0.3, 0.1], [0.5, -0.2], [0.05, 0.65]])
        h64 = haar_average_metric(radial_metric(), cutoff, kernel, torus_group(64)).value(pts)
        h128 = haar_average_metric(radial_metric(), cutoff, kernel, torus_group(128)).value(pts)
        assert np.max(np.abs(h64 - h128)) <= 1e-8

    def test_torus_invariance_off_the_quadrature_nodes(self):
        cutoff = unit_chart_cutoff()
        kernel = MollifierKernel.create(2, 0.1, level=2)
        averaged = haar_average_metric(radial_metric(), cutoff, kernel, torus_group(64))
        angles = 2.0 * np.pi * (np.arange(5) + 0.37) / 7.0
        mats = np.stack([
            np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]]) for a in angles
        ])
        probes = GroupAction(mats, weights=np.full(5, 0.2), is_quadrature=True, check=False)
        pts = np.array([[0.3, 0.1], [0.5, -0.2], [0.44, 0.12]])
        assert metric_invariance_residual(averaged, probes, pts) <= 1e-6

    def test_non_isometric_input_rejected(self):
        skew = conformal_metric(lambda p: 1.0 + p[..., 0])
        probe = np.array([[0.4, 0.1]])
        with pytest.raises(MetricError, match="isometries"):
            haar_average_metric(skew, unit_chart_cutoff(), MollifierKernel.create(2, 0.1),
                                cyclic_rotation_group(4), isometry_points=probe)

    def test_trivial_group_matches_single_chart_pass(self):
        cutoff = unit_chart_cutoff()
        kernel = MollifierKernel.create(2, 0.15, level=2)
        g = sphere_metric()
        averaged = haar_average_metric(g, cutoff, kernel, trivial_group(2))
        single = chart_smooth_metric(g, cutoff, kernel)
        pts = np.array([[0.5, 0.1], [0.9, 0.2], [1.1, -0.3]])
        assert np.array_equal(averaged.value(pts), single.value(pts))


class TestGridCache:
    def test_exact_at_nodes_and_outside_box(self):
        g = sphere_metric()
        grid = BoxGrid([-0.8, -0.8], [0.8, 0.8], (17, 17))
        cached = GridCachedMetric(g, grid)
        nodes = grid.points()[::7]
        assert np.max(np.abs(cached.value(nodes) - g.value(nodes))) < 1e-14
        outside = np.array([[0.9, 0.0], [-1.2, 0.4]])
        assert np.array_equal(cached.value(outside), g.value(outside))

    def test_interpolation_error_scale(self):
        g = sphere_metric()
        cached = GridCachedMetric(g, BoxGrid([-0.8, -0.8], [0.8, 0.8], (41, 41)))
        rng = np.random.default_rng(3)
        pts = rng.uniform(-0.75, 0.75, size=(50, 2))
        gap = np.max(np.abs(cached.value(pts) - g.value(pts)))
        assert 0.0 < gap < 5e-3

    def test_constant_field_interpolates_exactly(self):
        m = np.array([[2.0, 0.3], [0.3, 1.0]])
        cached = GridCachedMetric(constant_metric(m), BoxGrid([-1.0, -1.0], [1.0, 1.0], (9, 9)))
        pts = np.array([[0.013, -0.41], [0.77, 0.31]])
        assert np.max(np.abs(cached.value(pts) - m)) < 1e-15


class TestCompose:
    def test_single_chart_reduces_to_one_average(self):
        cutoff = unit_chart_cutoff()
        kernel = MollifierKernel.create(2, 0.15, level=2)
        group = cyclic_rotation_group(4)
        g = constant_metric(np.eye(2))
        composed = compose_chart_stages(g, [cutoff], [kernel], group)
        direct = haar_average_metric(g, cutoff, kernel, group)
        pts = np.array([[0.5, 0.1], [0.95, 0.0]])
        assert np.array_equal(composed.value(pts), direct.value(pts))

    def test_strip_overlap_reproduces_input(self):
        m = np.array([[2.0, 0.3], [0.3, 1.0]])
        cut_right = ChartCutoff(AffineChart.scaled([0.25, 0.0], 2.0))
        cut_left = ChartCutoff(AffineChart.scaled([-0.25, 0.0], 2.0))
        kernel = MollifierKernel.create(2, 0.08, level=2)
        cache = BoxGrid([-0.8, -0.8], [0.8, 0.8], (41, 41))
        composed = compose_chart_stages(constant_metric(m), [cut_right, cut_left],
                                        [kernel, kernel], trivial_group(2),
                                        cache_grid=cache)
        overlap = np.array([[0.0, 0.0], [0.03, -0.02], [-0.04, 0.01], [0.02, 0.035]])
        assert np.max(np.abs(composed.value(overlap) - m)) < 1e-13

    def test_stage_count_mismatch_rejected(self):
        with pytest.raises(MetricError, match="per chart"):
            compose_chart_stages(constant_metric(np.eye(2)), [unit_chart_cutoff()],
                                 [], trivial_group(2))


class TestSeminorm:
    def test_constant_field_sup_norm(self):
        m = np.array([[2.0, 0.3], [0.3, 1.0]])
        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (21, 21))
        report = sobolev_seminorm(constant_metric(m), grid)
        assert report.value == 2.0
        assert report.stable is None

    def test_quadratic_conformal_sup_norm(self):
        g = conformal_metric(lambda p: 1.0 + p[..., 0] ** 2)
        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (41, 41))
        report = sobolev_seminorm(g, grid)
        # sup of the factor and its exact second difference both equal 2
        assert abs(report.value - 2.0) < 1e-12

    def test_finite_p_volume_factor(self):
        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (21, 21))
        report = sobolev_seminorm(constant_metric(np.eye(2)), grid, p=4.0)
        cell = float(np.prod(grid.spacing))
        expected = (cell * 21 * 21) ** 0.25
        assert abs(report.value - expected) < 1e-12

    def test_reference_subtraction_gives_zero(self):
        g = sphere_metric()
        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (17, 17))
        report = sobolev_seminorm(g, grid, reference=g)
        assert report.value == 0.0

    def test_refinement_stability_gate(self):
        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (33, 33))
        report = sobolev_seminorm(sphere_metric(), grid, refine=True)
        assert report.refined_value is not None
        assert report.stable is True

    def test_linear_factor_hoelder_norm(self):
        g = conformal_metric(lambda p: 1.0 + 0.5 * p[..., 0])
        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (21, 21))
        report = sobolev_seminorm(g, grid, order=(1, 0.5))
        # gradient is constant so the quotient vanishes; sup term wins
        assert abs(report.value - 1.5) < 1e-12

    def test_kink_blows_up_hoelder_quotient(self):
        for counts, expect in [(21, 3.0), (41, 4.2)]:
            grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (counts, counts))
            g = conformal_metric(lambda p: np.abs(p[..., 1]))
            report = sobolev_seminorm(g, grid, order=(1, 0.5))
            assert report.value >= expect

    def test_seminorm_from_values_matches_field_route(self):
        g = sphere_metric()
        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (17, 17))
        vals = g.value(grid.points()).reshape(grid.counts + (2, 2))
        direct = seminorm_from_values(vals, grid)
        assert direct == sobolev_seminorm(g, grid).value


class TestEllipticityConstant:
    def test_sphere_floor_on_the_unit_circle(self):
        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (41, 41))
        assert a_nu(sphere_metric(), grid) == 1.0

    def test_grid_outside_ball_rejected(self):
        grid = BoxGrid([5.0, 5.0], [6.0, 6.0], (5, 5))
        with pytest.raises(MetricError, match="inside the closed ball"):
            a_nu(sphere_metric(), grid)

    def test_indefinite_input_rejected(self):
        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (5, 5))
        with pytest.raises(MetricError, match="not a metric"):
            a_nu(constant_metric(np.diag([1.0, -1.0])), grid)


class TestEpsilonSelection:
    @staticmethod
    def _selector(calls=None, max_halvings=6):
        def smoother(epsilon):
            if calls is not None:
                calls.append(epsilon)
            return constant_metric((1.0 + 5.0 * epsilon) * np.eye(2))

        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (5, 5))
        return EpsilonSelector(smoother, constant_metric(np.eye(2)), grid,
                               start=0.2, max_halvings=max_halvings)

    def test_selects_largest_passing_epsilon(self):
        sel = self._selector()
        result = select_epsilon_for_k(sel, 1, 1.0)
        assert result.satisfied and result.epsilon == 0.2
        assert abs(result.achieved - 1.0) < 1e-12

    def test_tighter_bound_descends_the_ladder(self):
        calls = []
        sel = self._selector(calls)
        first = select_epsilon_for_k(sel, 1, 1.0)
        fourth = select_epsilon_for_k(sel, 4, 1.0)
        assert fourth.epsilon <= first.epsilon
        assert fourth.epsilon == 0.05
        # the cache means only the new ladder stages were evaluated
        assert calls == [0.2, 0.1, 0.05]

    def test_unattainable_bound_reports_diagnostics(self):
        sel = self._selector(max_halvings=3)
        result = sel.select(1e-9)
        assert not result.satisfied
        assert len(result.tested) == 4
        assert result.achieved == min(v for _, v in result.tested)

    def test_invalid_k_rejected(self):
        with pytest.raises(MetricError, match="at least 1"):
            select_epsilon_for_k(self._selector(), 0, 1.0)


class TestLevelSchedule:
    def test_schedule_shape(self):
        assert default_level_schedule(0.2) == 2
        assert default_level_schedule(0.01) == 1
        assert default_level_schedule(0.2, dimension=1) == 7
        assert default_level_schedule(0.2, dimension=3) == 3

    def test_cross_level_agreement_in_the_sweep_range(self):
        g = sphere_metric()
        grid = BoxGrid([-1.0, -1.0], [1.0, 1.0], (65, 65))
        pts = grid.points()
        ref = g.value(pts).reshape(grid.counts + (2, 2))
        values = {}
        for level in (1, 2):
            kernel = MollifierKernel.create(2, 0.0125, level=level)
            vals = mollify_metric(g, kernel).value(pts).reshape(ref.shape)
            values[level] = seminorm_from_values(vals - ref, grid)
        assert abs(values[1] - values[2]) / values[2] < 0.015


@settings(max_examples=25, deadline=None)
@given(
    scale=st.floats(min_value=0.5, max_value=3.0),
    bump=st.floats(min_value=-0.4, max_value=0.4),
    x=st.floats(min_value=0.82, max_value=2.0),
    y=st.floats(min_value=-0.5, max_value=0.5),
)
def test_property_identity_zone_for_generic_conformal_metrics(scale, bump, x, y):
    # x >= 0.82 keeps the point past R_IDENTITY for every drawn y
    point = np.array([[x, y]])
    g = conformal_metric(lambda p: scale + bump * np.sin(p[..., 0] + 2.0 * p[..., 1]))
    smoothed = mollify_metric(g, MollifierKernel.create(2, 0.1, level=1), spd_check=False)
    assert np.array_equal(smoothed.value(point), g.value(point))


@settings(max_examples=25, deadline=None)
@given(theta=st.floats(min_value=-3.1, max_value=3.1))
def test_property_orthogonal_pullback_round_trip(theta):
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    g = sphere_metric()
    once = pullback_metric(g, LinearMap(rot))
    back = pullback_metric(once, LinearMap(rot.T))
    pts = np.array([[0.3, -0.2], [0.7, 0.5]])
    assert np.max(np.abs(back.value(pts) - g.value(pts))) < 1e-14
