"""Python access to the viltwin simulator core."""

import json

from . import _core
from ._core import (
    Error,
    Shield,
    Twin,
    ValidationError,
    compare_bags,
    flags_from_distance,
    kinematic_step,
    light_color,
    pd_accel,
    rule_filter,
    trace_csv,
)

__all__ = [
    "Error",
    "Shield",
    "Twin",
    "ValidationError",
    "check_paper_strategy",
    "compare_bags",
    "flags_from_distance",
    "kinematic_step",
    "light_color",
    "paper_spec",
    "pd_accel",
    "rule_filter",
    "run",
    "synthesize",
    "trace_csv",
]


def run(scenario, duration=120.0, seed=0, bag=None):
    """Run a scenario and return its metrics as a dict."""
    return json.loads(_core.run(str(scenario), duration, seed, None if bag is None else str(bag)))


def paper_spec():
    return json.loads(_core.paper_spec())


def synthesize():
    """Solve the built-in drive spec. The strategy comes back decoded."""
    res = dict(_core.synthesize())
    res["strategy"] = json.loads(res["strategy"]) if res["strategy"] else None
    return res


def check_paper_strategy(horizon=10):
    return _core.check_paper_strategy(horizon)
