"""Python bindings for the tfmlab C++ core."""

import json

from ._tfmlab import (
    UNLIMITED,
    ConfigError,
    Error,
    InvalidParameter,
    OutOfRange,
    ValueDistribution,
    __version__,
    build_block,
    checker_names,
    estimate_revenue,
    inverse_virtual,
    list_library,
    monopoly_reserve,
    optimal_revenue_quadrature,
    regularity_alpha,
    run,
    scenario_hash,
    set_workers,
    virtual_value,
)
from . import _tfmlab


def load_config(config):
    """Canonical form of a config (file path or inline text) as a dict."""
    return json.loads(_tfmlab.load_config(str(config)))


def run_checker(config, checker, reps=None):
    """Run one property checker and return its verdict as a dict."""
    return json.loads(_tfmlab.run_checker(str(config), checker, reps))


def mechanism(kind, **params):
    """Outcome of one block-building call is `build_block(mechanism(...), advice, bids)`."""
    return json.dumps(dict(kind=kind, **params))


__all__ = [
    "UNLIMITED",
    "ConfigError",
    "Error",
    "InvalidParameter",
    "OutOfRange",
    "ValueDistribution",
    "__version__",
    "build_block",
    "checker_names",
    "estimate_revenue",
    "inverse_virtual",
    "list_library",
    "load_config",
    "mechanism",
    "monopoly_reserve",
    "optimal_revenue_quadrature",
    "regularity_alpha",
    "run",
    "run_checker",
    "scenario_hash",
    "set_workers",
    "virtual_value",
]
