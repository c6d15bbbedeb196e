"""Stochastic campus epidemic model: simulation, ABC fitting, ensembles and testing policy sweeps."""

import json

from . import _core
from ._core import (
    InsufficientCurves,
    InvalidArgument,
    NoAcceptances,
    ParseError,
    r0_closed_form,
)

__version__ = _core.__version__

__all__ = [
    "InsufficientCurves",
    "InvalidArgument",
    "NoAcceptances",
    "ParseError",
    "default_params",
    "detect_peaks",
    "ensemble",
    "fit",
    "functional_band",
    "parse_config",
    "policy_sweep",
    "r0",
    "r0_closed_form",
    "simulate",
]


def _params(params):
    return json.dumps(params) if params else ""


def default_params():
    return json.loads(_core.default_params())


def simulate(params=None, exposed=10, horizon_days=112, seed=1):
    """One trajectory; returns weekly cases, peaks and compartment curves."""
    return json.loads(_core.simulate(_params(params), exposed, horizon_days, seed))


def detect_peaks(series, floor=20):
    return json.loads(_core.detect_peaks(list(series), floor))["peaks"]


def r0(params=None):
    return _core.r0(_params(params))


def fit(observed, params=None, exposed=10, horizon_days=112, grid_points=11, n_traj=200, seed=1, workers=0):
    """Rejection ABC. Returns (summary dict, acceptance surface CSV text)."""
    summary, surface = _core.fit(
        list(observed), _params(params), exposed, horizon_days, grid_points, n_traj, seed, workers
    )
    return json.loads(summary), surface


def ensemble(surface_csv, size=200, params=None, exposed=10, horizon_days=112, seed=1, workers=0):
    return json.loads(_core.ensemble(surface_csv, size, _params(params), exposed, horizon_days, seed, workers))


def functional_band(curves):
    return json.loads(_core.functional_band([list(c) for c in curves]))


def policy_sweep(surface_csv, strategies=None, n=200, params=None, exposed=10, horizon_days=112, seed=1,
                 common_random_numbers=True, workers=0):
    text = json.dumps(strategies) if strategies is not None else ""
    return json.loads(
        _core.policy_sweep(text, surface_csv, n, _params(params), exposed, horizon_days, seed,
                           common_random_numbers, workers)
    )


def parse_config(text):
    """Validates TOML config text; returns the canonical TOML with defaults applied."""
    return _core.parse_config(text)
