"""Experiment configuration: a single JSON file per experiment.

Schema (all keys optional except ``scenario``):

    scenario          built-in scenario name
    epsilons          positive strictly decreasing list (default 0.2 halved 4x)
    level             fixed kernel quadrature level, or null for the
                      per-epsilon default schedule
    grid              metric grid nodes per axis (default 65)
    graph_grid        distance graph nodes per axis (default 25)
    group_quadrature  torus quadrature node count (default 64)
    pairs             dilation sample pair count (default 64)
    delta             target tolerance where a kind needs one, or null for
                      the kind default
    k_values          targets for epsilon selection (default [1, 2, 4])
    max_halvings      epsilon selector lattice depth (default 16)
    out               output directory, or null for runs/<scenario>-<kind>
    seed              RNG seed (default 42)

Unknown keys are rejected rather than ignored, so typos fail loudly.
"""

import json
from dataclasses import dataclass, fields, replace

from .scenarios import available_scenarios

__all__ = ["ConfigError", "ExperimentConfig", "load_config"]

DEFAULT_EPSILONS = (0.2, 0.1, 0.05, 0.025)


class ConfigError(ValueError):
    """Unusable experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    epsilons: tuple = DEFAULT_EPSILONS
    level: int = None
    grid: int = 65
    graph_grid: int = 25
    group_quadrature: int = 64
    pairs: int = 64
    delta: float = None
    k_values: tuple = (1, 2, 4)
    max_halvings: int = 16
    out: str = None
    seed: int = 42

    def __post_init__(self):
        if self.scenario not in available_scenarios():
            raise ConfigError(
                "unknown scenario %r; available: %s"
                % (self.scenario, ", ".join(available_scenarios()))
            )
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(e <= 0.0 for e in eps):
            raise ConfigError("field 'epsilons' must be a nonempty positive list")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("field 'epsilons' must be strictly decreasing")
        object.__setattr__(self, "epsilons", eps)
        for name in ("grid", "graph_grid", "group_quadrature", "pairs",
                     "max_halvings", "seed"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError("field %r must be a positive integer" % name)
        if self.level is not None and (not isinstance(self.level, int)
                                       or not 1 <= self.level <= 3):
            raise ConfigError("field 'level' must be 1, 2, or 3")
        if self.delta is not None and not self.delta > 0.0:
            raise ConfigError("field 'delta' must be positive")
        ks = tuple(int(k) for k in self.k_values)
        if not ks or any(k < 1 for k in ks) or any(b < a for a, b in zip(ks, ks[1:])):
            raise ConfigError("field 'k_values' must be a nondecreasing list of"
                              " integers >= 1")
        object.__setattr__(self, "k_values", ks)

    def override(self, **kw):
        """Config with the given fields replaced; None values are ignored."""
        live = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **live) if live else self


def load_config(path):
    """Parse and validate a JSON experiment config."""
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except OSError as err:
        raise ConfigError("cannot read config %s: %s" % (path, err)) from err
    except json.JSONDecodeError as err:
        raise ConfigError(
            "config %s is not valid JSON: %s (line %d, column %d)"
            % (path, err.msg, err.lineno, err.colno)
        ) from err
    if not isinstance(raw, dict):
        raise ConfigError("config %s must be a JSON object" % path)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(
            "config %s has unknown keys: %s" % (path, ", ".join(unknown))
        )
    if "scenario" not in raw:
        raise ConfigError("config %s is missing the 'scenario' key" % path)
    for key in ("epsilons", "k_values"):
        if key in raw:
            if not isinstance(raw[key], list):
                raise ConfigError("field %r must be a list" % key)
            raw[key] = tuple(raw[key])
    return ExperimentConfig(**raw)
