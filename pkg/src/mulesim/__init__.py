"""mulesim: deterministic simulator for air-ground robot teams with gossip comms.

A fixed-timestep world where ground robots navigate a semantic costmap toward
shared goals, an air robot reveals terrain and optionally ferries messages,
and all communication happens through opportunistic pairwise sync sessions.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .engine import ScenarioConfig, Simulation, config_from_dict, load_config
from .errors import (
    ConfigError,
    MulesimError,
    OutOfBoundsError,
    SchemaError,
    UnknownTopicError,
    UnsatisfiableLayoutError,
)
from .world import GridWorld, TerrainLabel, generate_world, load_world, save_world

__all__ = [
    "__version__",
    "ScenarioConfig",
    "Simulation",
    "config_from_dict",
    "load_config",
    "ConfigError",
    "MulesimError",
    "OutOfBoundsError",
    "SchemaError",
    "UnknownTopicError",
    "UnsatisfiableLayoutError",
    "GridWorld",
    "TerrainLabel",
    "generate_world",
    "load_world",
    "save_world",
]
