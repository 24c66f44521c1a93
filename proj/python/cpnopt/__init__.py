"""Discrete-posterior Bayesian optimization on synthetic analog testbenches."""

import json

from ._cpn import (
    BackendError,
    ConfigError,
    ContractError,
    CpnError,
    DiscretePosterior,
    InvalidPosterior,
    bounds,
    closed_form_ei,
    dei,
    discretize_gaussian,
    evaluate,
    feasibility_mass,
    fom,
    metric_names,
    moments,
    r_squared,
    testbenches,
)
from . import _cpn

__all__ = [
    "BackendError", "ConfigError", "ContractError", "CpnError", "DiscretePosterior", "InvalidPosterior",
    "audit_trace", "bounds", "closed_form_ei", "dei", "discretize_gaussian", "evaluate", "feasibility_mass",
    "fom", "metric_names", "moments", "r_squared", "random_search", "run", "testbenches",
]


def run(**config):
    """Run the optimizer; keyword arguments are run config keys. Returns the trace as a dict."""
    return json.loads(_cpn.run_json(json.dumps(config)))


def random_search(**config):
    return json.loads(_cpn.random_search_json(json.dumps(config)))


def audit_trace(trace):
    """Violated invariants of a trace dict; empty when it passes."""
    return _cpn.audit_trace_json(json.dumps(trace))
