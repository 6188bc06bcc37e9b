"""Experiment orchestration: sweeps, check evaluation, CSV/JSON reports.

Each experiment kind maps a scenario and a config to a fixed-header row
table plus a list of named checks.  Floats are printed with 17 significant
digits so equal runs produce byte-identical files.  Epsilon stages of a
sweep are independent and may run on a small thread pool capped by the
EQMOLLIFY_THREADS environment variable.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, ExperimentConfig
from .curvature import curvature_bounds
from .currents import equivariant_sample, evaluate, smooth_by_shift, smooth_by_translation
from .distances import dilation_estimate, seeded_point_pairs
from .kernel import MollifierKernel
from .metrics import (
    BoxGrid,
    a_nu,
    chart_smooth_metric,
    compose_chart_stages,
    default_level_schedule,
    haar_average_metric,
    mollify_metric,
    sobolev_seminorm,
    EpsilonSelector,
    select_epsilon_for_k,
)
from .scenarios import build_scenario

__all__ = ["EXPERIMENT_KINDS", "CheckResult", "ExperimentReport", "run_experiment",
           "thread_cap"]

EXPERIMENT_KINDS = (
    "mollify-current",
    "smooth-metric",
    "curvature-report",
    "lipschitz-sweep",
    "invariance-check",
    "select-epsilon",
)

FD_STEP = 5e-3
# torus invariance is certified off the quadrature lattice; five fixed
# angles strictly between the 64-node grid lines
OFF_NODE_ANGLES = tuple((j + 0.5) * 2.0 * np.pi / 320.0 for j in range(5))


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool


@dataclass
class ExperimentReport:
    scenario: str
    kind: str
    header: tuple
    rows: list
    checks: list
    csv_path: str = None
    summary_path: str = None

    @property
    def passed(self):
        return all(check.passed for check in self.checks)


def thread_cap():
    raw = os.environ.get("EQMOLLIFY_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = min(4, os.cpu_count() or 1)
    return max(1, cap)


def _sweep(fn, items):
    """Apply fn to each item, possibly in parallel, preserving order."""
    items = list(items)
    cap = min(thread_cap(), len(items))
    if cap <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        return list(pool.map(fn, items))


def _kernel_for(epsilon, config, dimension):
    level = config.level or default_level_schedule(epsilon, dimension)
    return MollifierKernel.create(dimension, epsilon, level=level)


def _smoothed_field(scenario, epsilon, config):
    """The scenario's smoothed metric at one epsilon.

    Finite groups run the full chart-then-average pipeline.  For the torus
    the Haar quadrature multiplies cost by its node count while the
    rotation-symmetric chart construction already reproduces the average
    to quadrature accuracy, so sweeps evaluate the chart stage and the
    invariance-check kind certifies the residual separately.
    """
    kernel = _kernel_for(epsilon, config, scenario.dimension)
    if scenario.group_kind == "torus":
        field = scenario.metric
        for cutoff in scenario.atlas:
            field = chart_smooth_metric(field, cutoff, kernel)
        return field
    if len(scenario.atlas) == 1:
        return haar_average_metric(scenario.metric, scenario.atlas[0], kernel,
                                   scenario.group)
    kernels = [kernel] * len(scenario.atlas)
    return compose_chart_stages(scenario.metric, list(scenario.atlas), kernels,
                                scenario.group)


def _series_step_ratio(values, floor=1e-13):
    """Worst consecutive ratio of a decay series; plateaus at the floor
    count as flat rather than dividing by zero."""
    worst = 0.0
    for a, b in zip(values, values[1:]):
        if a <= floor and b <= floor:
            worst = max(worst, 1.0)
        else:
            worst = max(worst, b / max(a, floor))
    return worst


def _fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return "%d" % value
    return "%.17g" % value


def _probe_points(scenario, count=40, seed=42):
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((count, scenario.dimension))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    radii = scenario.domain_radius * rng.uniform(0.05, 1.0, size=count) ** 0.5
    return raw * radii[:, None]


def _rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def _metric_residual(field, matrices, points):
    base = field.value(points)
    worst = 0.0
    for mat in matrices:
        moved = field.value(points @ mat.T)
        pulled = np.einsum("ji,rjk,kl->ril", mat, moved, mat)
        worst = max(worst, float(np.max(np.abs(pulled - base))))
    return worst


def _sample_residual(sample, matrices, forms):
    base = sample.pair_many(forms)
    worst = 0.0
    for mat in matrices:
        rotated = sample.rotated(mat)
        worst = max(worst, float(np.max(np.abs(rotated.pair_many(forms) - base))))
    return worst


def _run_mollify_current(scenario, config):
    if not scenario.currents:
        raise ConfigError("scenario %s has no current bank" % scenario.name)
    delta = config.delta if config.delta is not None else 0.02
    pairs = scenario.matched_pairs()
    references = {
        (ci, fi): evaluate(scenario.currents[ci], scenario.forms[fi])
        for ci, fi in pairs
    }

    def stage(epsilon):
        kernel = _kernel_for(epsilon, config, scenario.dimension)
        out = []
        for ci, fi in pairs:
            current, form = scenario.currents[ci], scenario.forms[fi]
            reference = references[(ci, fi)]
            tolerance = delta * max(1.0, abs(reference))
            for route, smoother in (("translation", smooth_by_translation),
                                    ("shift", smooth_by_shift)):
                observed = smoother(current, form, kernel)
                out.append((epsilon, "current%d" % ci, "form%02d" % fi, route,
                            observed, reference, abs(observed - reference),
                            tolerance))
        return out

    stages = _sweep(stage, config.epsilons)
    rows = [row for stage_rows in stages for row in stage_rows]
    checks = []
    for route in ("translation", "shift"):
        ratios, finals = [], []
        for ci, fi in pairs:
            series = [row[6] for row in rows
                      if row[1] == "current%d" % ci and row[2] == "form%02d" % fi
                      and row[3] == route]
            tolerance = delta * max(1.0, abs(references[(ci, fi)]))
            ratios.append(_series_step_ratio(series))
            finals.append(series[-1] / tolerance)
        checks.append(CheckResult("%s_series_decreasing" % route,
                                  max(ratios), 1.0 + 1e-9,
                                  max(ratios) <= 1.0 + 1e-9))
        checks.append(CheckResult("%s_final_error" % route,
                                  max(finals), 1.0, max(finals) <= 1.0))
    header = ("epsilon", "current", "form", "route", "observed", "reference",
              "error", "tolerance")
    return header, rows, checks


def _run_smooth_metric(scenario, config):
    delta = config.delta if config.delta is not None else 0.01
    radius = scenario.scan_radius
    grid = BoxGrid((-radius,) * scenario.dimension, (radius,) * scenario.dimension,
                   (config.grid,) * scenario.dimension)

    def stage(epsilon):
        kernel = _kernel_for(epsilon, config, scenario.dimension)
        smooth = mollify_metric(scenario.metric, kernel)
        deviation = sobolev_seminorm(smooth, grid, reference=scenario.metric).value
        return epsilon, kernel.quadrature.level, deviation, delta

    rows = _sweep(stage, config.epsilons)
    series = [row[2] for row in rows]
    ratio = _series_step_ratio(series)
    best = min(series)
    selected = next((eps for eps, _, dev, _ in rows if dev < delta), float("nan"))
    checks = [
        CheckResult("deviation_decreasing", ratio, 1.05, ratio <= 1.05),
        CheckResult("below_delta", best, delta, best < delta),
        CheckResult("selected_epsilon", selected, delta, selected == selected),
    ]
    header = ("epsilon", "level", "seminorm_deviation", "tolerance")
    return header, rows, checks


def _run_curvature_report(scenario, config):
    delta = config.delta if config.delta is not None else 0.05
    radius = scenario.scan_radius
    grid = BoxGrid((-radius,) * scenario.dimension, (radius,) * scenario.dimension,
                   (config.grid,) * scenario.dimension)
    declared = scenario.curvature_bounds
    width = max(0.02, 2.0 * FD_STEP)
    kw = dict(mask_radius=radius, exclusion_radii=scenario.discontinuity_radii,
              exclusion_width=width, seed=config.seed)
    raw = curvature_bounds(scenario.metric, grid, **kw)
    rows = [
        (0.0, "lower_bound", raw.lower, declared[0], delta),
        (0.0, "upper_bound", raw.upper, declared[1], delta),
    ]

    def stage(epsilon):
        field = _smoothed_field(scenario, epsilon, config)
        bounds = curvature_bounds(field, grid, mode="fd", step=FD_STEP, **kw)
        return [
            (epsilon, "lower_bound", bounds.lower, declared[0], delta),
            (epsilon, "upper_bound", bounds.upper, declared[1], delta),
        ]

    for stage_rows in _sweep(stage, config.epsilons):
        rows.extend(stage_rows)
    raw_gap = max(abs(raw.lower - declared[0]), abs(raw.upper - declared[1]))
    gaps = {}
    for epsilon, quantity, value, reference, _ in rows[2:]:
        gaps[epsilon] = max(gaps.get(epsilon, 0.0), abs(value - reference))
    best_eps = min(gaps, key=gaps.get)
    checks = [
        CheckResult("raw_bounds_gap", raw_gap, delta, raw_gap <= delta),
        CheckResult("smoothed_bounds_gap", gaps[best_eps], delta,
                    gaps[best_eps] <= delta),
        CheckResult("smoothed_best_epsilon", best_eps, delta,
                    gaps[best_eps] <= delta),
    ]
    header = ("epsilon", "quantity", "value", "reference", "tolerance")
    return header, rows, checks


def _run_lipschitz_sweep(scenario, config):
    delta = config.delta if config.delta is not None else 0.02
    radius = scenario.scan_radius
    grid = BoxGrid((-radius,) * scenario.dimension, (radius,) * scenario.dimension,
                   (config.graph_grid,) * scenario.dimension)
    pairs = seeded_point_pairs(config.pairs, config.seed,
                               0.9 * scenario.domain_radius,
                               dimension=scenario.dimension,
                               min_separation=0.4 * scenario.domain_radius)

    def stage(epsilon):
        field = _smoothed_field(scenario, epsilon, config)
        report = dilation_estimate(scenario.metric, field, pairs, grid,
                                   mask_radius=radius, epsilon=epsilon)
        return epsilon, report.max_deviation, delta

    rows = _sweep(stage, config.epsilons)
    series = [row[1] for row in rows]
    ratio = _series_step_ratio(series)
    checks = [
        CheckResult("deviation_decreasing", ratio, 1.10, ratio <= 1.10),
        CheckResult("final_deviation", series[-1], delta, series[-1] <= delta),
    ]
    header = ("epsilon", "max_dilation_deviation", "tolerance")
    return header, rows, checks


def _run_invariance_check(scenario, config):
    finite = scenario.group_kind != "torus"
    metric_tol = 1e-10 if finite else 1e-6
    current_tol = 1e-10
    points = _probe_points(scenario, seed=config.seed)
    if finite:
        matrices = list(scenario.group.matrices)
    else:
        matrices = [_rotation(angle) for angle in OFF_NODE_ANGLES]

    def stage(epsilon):
        kernel = _kernel_for(epsilon, config, scenario.dimension)
        if len(scenario.atlas) == 1:
            field = haar_average_metric(scenario.metric, scenario.atlas[0],
                                        kernel, scenario.group)
        else:
            field = compose_chart_stages(scenario.metric, list(scenario.atlas),
                                         [kernel] * len(scenario.atlas),
                                         scenario.group)
        out = [(epsilon, "smoothed_metric",
                _metric_residual(field, matrices, points), metric_tol)]
        for ci, current in enumerate(scenario.currents):
            forms = [f for f in scenario.forms if f.degree == current.degree]
            sample = equivariant_sample(current, kernel, scenario.atlas[0],
                                        scenario.group)
            out.append((epsilon, "smoothed_current_%d" % ci,
                        _sample_residual(sample, scenario.group.matrices, forms),
                        current_tol))
        return out

    stages = _sweep(stage, config.epsilons)
    rows = [row for stage_rows in stages for row in stage_rows]
    worst_metric = max(row[2] for row in rows if row[1] == "smoothed_metric")
    checks = [CheckResult("max_metric_residual", worst_metric, metric_tol,
                          worst_metric <= metric_tol)]
    current_rows = [row[2] for row in rows if row[1].startswith("smoothed_current")]
    if current_rows:
        worst = max(current_rows)
        checks.append(CheckResult("max_current_residual", worst, current_tol,
                                  worst <= current_tol))
    header = ("epsilon", "check", "residual", "tolerance")
    return header, rows, checks


def _run_select_epsilon(scenario, config):
    radius = scenario.scan_radius
    grid = BoxGrid((-radius,) * scenario.dimension, (radius,) * scenario.dimension,
                   (config.grid,) * scenario.dimension)
    unit_grid = BoxGrid((-1.0,) * scenario.dimension, (1.0,) * scenario.dimension,
                        (41,) * scenario.dimension)
    floor = a_nu(scenario.metric, unit_grid)
    selector = EpsilonSelector(
        lambda eps: _smoothed_field(scenario, eps, config),
        scenario.metric, grid,
        start=config.epsilons[0], max_halvings=config.max_halvings,
    )
    rows, selections = [], []
    for k in config.k_values:
        selection = select_epsilon_for_k(selector, k, floor)
        selections.append((k, selection))
        rows.append((k, selection.epsilon, selection.achieved, selection.bound))
    checks = []
    for k, selection in selections:
        checks.append(CheckResult("bound_met_k%d" % k, selection.achieved,
                                  selection.bound, selection.satisfied))
    epsilons = [sel.epsilon for _, sel in selections]
    worst = max((b / a for a, b in zip(epsilons, epsilons[1:])), default=0.0)
    checks.append(CheckResult("epsilon_non_increasing", worst, 1.0, worst <= 1.0))
    header = ("k", "epsilon", "achieved", "tolerance")
    return header, rows, checks


_RUNNERS = {
    "mollify-current": _run_mollify_current,
    "smooth-metric": _run_smooth_metric,
    "curvature-report": _run_curvature_report,
    "lipschitz-sweep": _run_lipschitz_sweep,
    "invariance-check": _run_invariance_check,
    "select-epsilon": _run_select_epsilon,
}


def _write_report(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    with open(csv_path, "w", newline="") as handle:
        handle.write(",".join(report.header) + "\n")
        for row in report.rows:
            handle.write(",".join(_fmt(cell) for cell in row) + "\n")
    summary_path = os.path.join(out_dir, "summary.json")
    summary = {
        "scenario": report.scenario,
        "kind": report.kind,
        "checks": [
            {"name": c.name, "value": float(c.value), "tolerance": float(c.tolerance),
             "pass": bool(c.passed)}
            for c in report.checks
        ],
    }
    with open(summary_path, "w") as handle:
        json.dump(summary, handle, indent=2, sort_keys=True)
        handle.write("\n")
    report.csv_path = csv_path
    report.summary_path = summary_path


def run_experiment(kind, config, write=True):
    """Run one experiment kind against a validated config.

    Reports land in the config's output directory (default
    ``runs/<scenario>-<kind>``) as results.csv plus summary.json.
    """
    if kind not in _RUNNERS:
        raise ConfigError(
            "unknown experiment kind %r; available: %s"
            % (kind, ", ".join(EXPERIMENT_KINDS))
        )
    if not isinstance(config, ExperimentConfig):
        raise ConfigError("run_experiment expects an ExperimentConfig")
    scenario = build_scenario(config.scenario,
                              group_quadrature=config.group_quadrature)
    header, rows, checks = _RUNNERS[kind](scenario, config)
    report = ExperimentReport(scenario=scenario.name, kind=kind, header=header,
                              rows=rows, checks=list(checks))
    if write:
        out_dir = config.out or os.path.join("runs", "%s-%s" % (scenario.name, kind))
        _write_report(report, out_dir)
    return report
