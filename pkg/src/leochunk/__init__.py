"""Chunk-based all-optical switching simulator for LEO constellations.

Modules, bottom-up: :mod:`orbital` (Walker-Delta geometry), :mod:`channel`
(FSO link budget), :mod:`topology` (snapshot graphs), :mod:`switching`
(fabric catalog), :mod:`traffic` (chunk arrivals), :mod:`routing` (k-shortest
paths and wavelength reservation), :mod:`engine` (discrete-event core),
:mod:`metrics`, :mod:`config`, :mod:`sweep` and :mod:`cli`.
"""
from .orbital import EUROPEAN_OGS, PRESETS, GroundStation, WalkerDeltaSpec, preset
from .switching import SwitchFabric, builtin_fabrics, lookup
from .channel import LinkBudgetParams
from .engine import NetworkContext, SimConfig, Simulation
from .traffic import TrafficConfig
from .config import ConfigError, ScenarioConfig, load_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "EUROPEAN_OGS", "PRESETS", "GroundStation", "WalkerDeltaSpec", "preset",
    "SwitchFabric", "builtin_fabrics", "lookup", "LinkBudgetParams",
    "NetworkContext", "SimConfig", "Simulation", "TrafficConfig",
    "ConfigError", "ScenarioConfig", "load_config", "parse_config",
]
