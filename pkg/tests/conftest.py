import math
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from fhutch.hutchinson import AffineMap, IfsSystem  # noqa: E402
from fhutch.metric import FGenerator, TauGenerator, abs_diff, euclidean  # noqa: E402

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SIERPINSKI_SHIFTS = [(0.0, 0.0), (0.5, 0.0), (0.25, math.sqrt(3) / 4)]


def sierpinski(tau=None, F=None, metric=None) -> IfsSystem:
    maps = tuple(AffineMap.scaling(0.5, t) for t in SIERPINSKI_SHIFTS)
    return IfsSystem(metric or euclidean(), maps, F or FGenerator("log"),
                     tau or TauGenerator.constant(math.log(2) - 1e-3))


def line_system(*maps, tau=0.5, F="log", metric=None) -> IfsSystem:
    """System on R from ``(ratio, shift)`` pairs."""
    fs = tuple(AffineMap([[r]], [t]) for r, t in maps)
    return IfsSystem(metric or abs_diff(), fs, FGenerator(F), TauGenerator.constant(tau))


@pytest.fixture
def sier():
    return sierpinski()


# Acceptance lines are collected here and echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
