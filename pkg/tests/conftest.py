"""Shared fixtures: the three recipe reports, each computed once per session.

The acceptance module and the reference-table tests both read these, so the
expensive multi-seed runs happen exactly once.
"""

from __future__ import annotations

import pytest

from sepsim import scenarios


def _run(name: str):
    cfg = scenarios.load_recipe(name)
    report, runs = scenarios.run_scenario_detailed(cfg)
    return cfg, report, runs


@pytest.fixture(scope="session")
def usecase1():
    return _run("usecase1")


@pytest.fixture(scope="session")
def usecase2():
    return _run("usecase2")


@pytest.fixture(scope="session")
def usecase3():
    return _run("usecase3")


@pytest.fixture(scope="session")
def usecase3_blacklist_on():
    """Seed-1 jam run with channel blacklisting switched on."""
    raw = scenarios.load_recipe("usecase3").to_dict()
    raw["blacklist_enabled"] = True
    cfg = scenarios.config_from_dict(raw)
    return scenarios.run_single(cfg, 1)


@pytest.fixture(scope="session")
def reference_tables():
    return scenarios.load_reference_tables()
