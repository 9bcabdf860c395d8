"""Second moments of linear SPDEs by recursive Wiener chaos and stochastic collocation."""

import json

from ._core import (
    ConfigError,
    SolverError,
    error_measures,
    gauss_hermite,
    mc_second_moments,
    scm_second_moments,
    smolyak,
    wce_second_moments,
)
from ._core import run_config as _run_config

__all__ = [
    "ConfigError",
    "SolverError",
    "error_measures",
    "gauss_hermite",
    "mc_second_moments",
    "run",
    "scm_second_moments",
    "smolyak",
    "wce_second_moments",
]


def run(config):
    """Run an experiment config (dict) and return the report as a dict."""
    return json.loads(_run_config(json.dumps(config)))
