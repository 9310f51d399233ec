import json
from pathlib import Path

import numpy as np
import pytest

from ctrlalloc import ActuatorLimits, ActuatorState

GHGV2_B = np.array([[-20.01, 20.01, 93.94, -93.94],
                    [126.7, 126.7, -501.4, -501.4],
                    [-127.5, 127.5, -45.72, 46.72]])
GHGV2_NU = np.array([-400.0, 800.0, -2000.0])


@pytest.fixture(scope="session")
def frozen():
    return json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


@pytest.fixture
def ghgv2():
    limits = ActuatorLimits.magnitude_only(np.zeros(4), np.full(4, 20.0))
    return GHGV2_B.copy(), GHGV2_NU.copy(), limits, ActuatorState.at_rest(np.zeros(4))


@pytest.fixture
def toy():
    B = np.array([[0.5, -0.5]])
    limits = ActuatorLimits.magnitude_only([0.0, 0.0], [1.5, 1.5])
    return B, np.array([0.5]), limits, ActuatorState.at_rest([0.0, 0.0])


def random_problem(rng, o=None, m=None):
    """Random effectiveness matrix, limits bracketing zero, a state and a demand."""
    o = o or int(rng.integers(1, 4))
    m = m or int(rng.integers(o, o + 4))
    B = rng.normal(size=(o, m)) * rng.uniform(0.5, 50.0)
    u_min = -rng.uniform(0.0, 20.0, m)
    u_max = rng.uniform(0.0, 20.0, m)
    rate = rng.uniform(1.0, 40.0, m)
    limits = ActuatorLimits(u_min, u_max, -rate, rate * rng.uniform(0.5, 1.5, m))
    u_prev = rng.uniform(u_min, u_max)
    u_prev2 = np.clip(u_prev + rng.normal(scale=0.05, size=m), u_min, u_max)
    state = ActuatorState(u_prev, u_prev2, 0.01)
    nu = B @ rng.uniform(u_min, u_max) * rng.uniform(0.5, 1.5)
    return B, nu, limits, state


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
