"""Laser-ranging exploration and mapping simulator."""

from .environment import EnvironmentModel, load_environment, read_environment
from .geometry import Point2, Pose, Segment2
from .config import RunConfig
from .runner import run_episode, compare_strategies

__all__ = [
    "EnvironmentModel",
    "Point2",
    "Pose",
    "RunConfig",
    "Segment2",
    "compare_strategies",
    "load_environment",
    "read_environment",
    "run_episode",
]
