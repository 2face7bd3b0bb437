"""Deterministic co-simulation of a two-phase separator rig.

The package couples a continuous gravity-separation plant with twin PID
level loops closed over a simulated TDMA sensor mesh, plus the scenario
harness and operator service built on top. Start with `scenarios.load_recipe`
and `scenarios.run_scenario`, or `world.SimWorld` for direct control.
"""

from .kernel import (
    ConfigurationError,
    FatalSimulationError,
    RngStream,
    SimClock,
    SimEvent,
    run_until,
)
from .scenarios import ScenarioConfig, load_recipe, run_scenario
from .world import SimWorld

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "FatalSimulationError",
    "RngStream",
    "ScenarioConfig",
    "SimClock",
    "SimEvent",
    "SimWorld",
    "load_recipe",
    "run_scenario",
    "run_until",
    "__version__",
]
