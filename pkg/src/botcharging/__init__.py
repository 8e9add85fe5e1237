"""Deterministic simulator of battery-powered patrol agents sharing one charger."""

from botcharging.energy import Band, BandThresholds, BatteryGauge
from botcharging.engine import MetricsReport, SimConfig, SimState, TraceRow, feasibility_margin, run
from botcharging.scheduler import ChargerStation, Policy
from botcharging.world import Heading, SubEnvironment

__all__ = [
    "Band",
    "BandThresholds",
    "BatteryGauge",
    "ChargerStation",
    "Heading",
    "MetricsReport",
    "Policy",
    "SimConfig",
    "SimState",
    "SubEnvironment",
    "TraceRow",
    "feasibility_margin",
    "run",
]

__version__ = "0.1.0"
