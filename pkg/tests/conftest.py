import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fpc.actions import ActionVector
from fpc.dataset import Episode, Step


def _step(t, dx, dy, dz, drz, g):
    return Step(t, f"img/{t}.png", ActionVector(dx, dy, dz, 0.0, 0.0, drz, g))


@pytest.fixture
def seven_step_episode() -> Episode:
    """Gripper trace [0,0,0,1,1,1,0]: a close event at t=4 and an open event
    at t=7. Actions are chosen so every non-event frame needs a correction
    and a_4 - a_2 = (0.05, 0, 0.2, *, *, -0.02)."""
    steps = (
        _step(1, 0.00, 0.00, 0.00, 0.00, 0.0),
        _step(2, 0.05, 0.02, -0.20, 0.02, 0.0),
        _step(3, 0.10, -0.03, 0.00, 0.00, 0.0),
        _step(4, 0.10, 0.02, 0.00, 0.00, 1.0),
        _step(5, 0.00, 0.00, 0.30, 0.00, 1.0),
        _step(6, 0.00, 0.15, 0.00, -0.05, 1.0),
        _step(7, 0.00, 0.00, -0.12, 0.00, 0.0),
    )
    return Episode(id="fixture-7", instruction="stack the red block on the blue block", steps=steps)
