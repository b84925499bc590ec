from pathlib import Path

import numpy as np
import pytest

from insmap.environment import load_environment

DATA = Path(__file__).resolve().parents[1] / "src" / "insmap" / "data"
ENVS = DATA / "envs"
COMPARE = ENVS / "compare"
NOISELESS_CFG = DATA / "configs" / "noiseless.cfg"
JUNCTION = ENVS / "junction_loop.env"
DRIFT = ENVS / "drift_room.env"
SQUARE = ENVS / "square_room.env"


def regular_polygon(k: int, radius: float, cx: float = 0.0, cy: float = 0.0) -> str:
    ang = 2 * np.pi * np.arange(k) / k
    return " ".join(f"{float(cx + radius * np.cos(a))!r},{float(cy + radius * np.sin(a))!r}" for a in ang)


@pytest.fixture
def polygon72():
    """Circle-like 72-gon of circumradius 2 around the origin, agent at the centre."""
    return load_environment(f"boundary: {regular_polygon(72, 2.0)}\nstart: 0,0,0\nagent_radius: 0.2\n")


@pytest.fixture
def square10():
    return load_environment("boundary: 0,0 10,0 10,10 0,10\nstart: 5,5,0\nagent_radius: 0.2\n")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
