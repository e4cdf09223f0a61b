from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from opinion_game import GameSpec, LambdaSpec, TimeGrid

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one summary line per acceptance criterion, printed at the end of the run."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def scenario_dir():
    return SCENARIOS


def random_spec(rng, n=3, dim=1, horizon=0.5, exogenous=True, box=(-1.0, 1.0)):
    """Random admissible game with every cost term switched on."""
    x0 = rng.uniform(0.6 * box[0], 0.6 * box[1], size=(n, dim))
    delta = rng.uniform(-0.5, 0.8, size=n)
    zeta = rng.uniform(0.0, 2.0, size=n) if exogenous else 0.0
    lam = (LambdaSpec("affine-decreasing", 0.3, rng.uniform(0.5, 2.0))
           if exogenous and dim == 1 else LambdaSpec())
    return GameSpec.build(x0, delta, zeta, box=box, horizon=horizon, lam=lam)


def smooth_profile(rng, spec, grid: TimeGrid, scale=0.6, modes=4):
    """Random smooth admissible controls strictly inside the boxes."""
    s = grid.nodes / grid.horizon
    basis = np.cos(np.pi * np.arange(modes)[None, :] * s[:, None])
    coef = rng.normal(size=(modes, spec.n_agents, spec.dim)) / (1 + np.arange(modes))[:, None, None]
    raw = np.einsum("km,mnd->knd", basis, coef)
    raw = raw / np.max(np.abs(raw))
    mid, half = 0.5 * (spec.box_lo + spec.box_hi), 0.5 * (spec.box_hi - spec.box_lo)
    return mid + scale * half * raw


def smooth_direction(rng, grid: TimeGrid, shape, modes=4):
    """Random smooth direction of unit sup norm, so an FD step ``h`` moves controls by at most ``h``."""
    s = grid.nodes / grid.horizon
    basis = np.cos(np.pi * np.arange(modes)[None, :] * s[:, None])
    coef = rng.normal(size=(modes,) + tuple(shape))
    v = np.tensordot(basis, coef, axes=(1, 0))
    return v / np.max(np.abs(v))
