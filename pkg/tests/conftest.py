"""Shared helpers and session-scoped runs the test files reuse.

The expensive complete searches (golomb6 at all three filter levels,
ft06 in both orders) run once per session; several files assert
different facts about the same trees.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cpscope.alldifferent import FilterLevel
from cpscope.models import build_model
from cpscope.search import Engine, SearchStrategy
from cpscope.store import Store
from cpscope.trace import SearchMonitor, run_engine


def run_model(
    name,
    level=None,
    order="increasing",
    strategy=SearchStrategy("dfs"),
    spy=False,
    all_solutions=False,
    sinks=(),
    all_vars=False,
    control=None,
):
    """Build and run a model the way the CLI does, in process."""
    store = Store()
    monitor = SearchMonitor(store, sinks=sinks, all_vars=all_vars)
    if control is not None and hasattr(control, "attach"):
        control.attach(store, monitor)
    if spy:
        monitor.spy_activate(True)
    built = build_model(name, filter_level=level, order=order, store=store)
    assert built.post_ok, f"model {name} failed while posting"
    header = {
        "model": built.name,
        "strategy": strategy.describe(),
        "run_id": 1,
        **built.options,
    }
    engine = Engine(
        store,
        built.goal,
        strategy=strategy,
        objective=built.objective,
        monitor=monitor,
        control=control,
        all_solutions=all_solutions,
    )
    summary = run_engine(engine, header)
    return summary, monitor, engine


RUN_TIMES: dict[str, float] = {}


def _timed(key, *args, **kwargs):
    started = time.perf_counter()
    result = run_model(*args, **kwargs)
    RUN_TIMES[key] = time.perf_counter() - started
    return result


@pytest.fixture(scope="session")
def golomb6_runs():
    return {
        level: _timed(f"golomb6:{level.value}", "golomb6", level=level)
        for level in (FilterLevel.BASIC, FilterLevel.BOUNDS, FilterLevel.EXTENDED)
    }


@pytest.fixture(scope="session")
def ft06_runs():
    return {
        order: _timed(f"ft06:{order}", "ft06", order=order)
        for order in ("increasing", "decreasing")
    }


@pytest.fixture(scope="session")
def golomb5_run():
    return _timed("golomb5", "golomb5")
