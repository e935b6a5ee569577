import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from extlorentz.fields import ParticleParams, preset  # noqa: E402

ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail=""):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


PRESET_NAMES = ("uniform_E", "uniform_B", "crossed_EB", "plane_wave", "coulomb", "linear_gradient")


def random_preset(name, rng):
    """A preset with seeded random parameters of order one."""
    if name == "uniform_E":
        return preset(name, e=rng.normal(size=3))
    if name == "uniform_B":
        return preset(name, b=rng.normal(size=3))
    if name == "crossed_EB":
        return preset(name, e=rng.normal(size=3), b=rng.normal(size=3))
    if name == "plane_wave":
        return preset(name, e0=rng.uniform(0.5, 2.0), k=rng.uniform(0.5, 2.0))
    if name == "coulomb":
        return preset(name, q_src=rng.uniform(0.5, 2.0), center=rng.uniform(-0.2, 0.2, size=3))
    if name == "linear_gradient":
        return preset(name, e0=rng.normal(size=3), b0=rng.normal(size=3),
                      grad_e=rng.normal(size=(3, 4)), grad_b=rng.normal(size=(3, 4)))
    raise ValueError(name)


def grid_points(rng, n=20, extent=1.0):
    """Random points, kept away from the coulomb centre region."""
    pts = rng.uniform(-extent, extent, size=(n, 4))
    pts[:, 1:] += np.sign(pts[:, 1:]) * 0.5
    return pts


@pytest.fixture
def unit_pp():
    """q = m = c = 1, so kappa = 1."""
    return ParticleParams(q=1.0, m=1.0, c=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)
