"""Deterministic dumbbell-topology simulator with pluggable AQM disciplines."""

__version__ = "0.1.0"

from aqmsim.engine import EventLoop, Link, Packet, SchedulingError
from aqmsim.metrics import jain_index, utilization

__all__ = [
    "EventLoop",
    "Link",
    "Packet",
    "SchedulingError",
    "jain_index",
    "utilization",
    "__version__",
]
