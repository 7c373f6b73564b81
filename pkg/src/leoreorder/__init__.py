"""Discrete-event simulation of TCP over a LEO satellite constellation.

Route changes between inter-satellite paths of different length reorder
packets in flight; the simulator reproduces how Reno, Cubic and BBR react.
"""
from .geometry import ConstellationConfig, GeoCoordinate, SatelliteId, orbital_speed
from .metrics import ReorderStats, TraceEvent, detect_reordering, ecdf, ccdf, goodput_series
from .runner import RunResult, run, simulate
from .scenario import PRESETS, ScenarioConfig, load_config, preset
from .topology import GroundStation, RouteSchedule, compute_route_schedule

__version__ = "0.1.0"

__all__ = [
    "ConstellationConfig", "GeoCoordinate", "GroundStation", "PRESETS", "ReorderStats", "RouteSchedule",
    "RunResult", "SatelliteId", "ScenarioConfig", "TraceEvent", "ccdf", "compute_route_schedule",
    "detect_reordering", "ecdf", "goodput_series", "load_config", "orbital_speed", "preset", "run", "simulate",
]
