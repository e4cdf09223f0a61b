import logging

import numpy as np
import pytest

from conftest import random_spec, smooth_profile
from opinion_game import GameSpec, SolverConfig, TimeGrid, ValidationError, integrate_forward, solve_fixed_point
from opinion_game.model import as_profile
from opinion_game.verification import (CycleDetected, brute_force_equilibrium, fd_gateaux, fine_grid_error,
                                       lipschitz_probe, piece_averages)


def _brute_force_spec(seed):
    rng = np.random.default_rng(seed)
    return GameSpec.build(rng.uniform(-0.4, 0.4, 2), rng.uniform(-0.5, 0.7, 2), horizon=0.3)


def test_fd_along_zero_direction_is_zero():
    spec = GameSpec.build([0.0, 0.2], 0.3, horizon=0.5)
    grid = TimeGrid(0.5, 10)
    w = as_profile([0.1, 0.1], grid.n_nodes, spec)
    assert fd_gateaux(spec, 0, w, np.zeros((grid.n_nodes, 1)), 1e-5, grid) == 0.0


def test_fd_on_a_one_step_grid_matches_hand_value():
    # controls out of everyone's reach: states stay put and J_0 is quadratic in w
    spec = GameSpec.build([-1.0, 1.0], [0.2, -0.3], box=(-2, 2), horizon=1.0)
    grid = TimeGrid(1.0, 1)
    w = as_profile([-1.8, 1.8], 2, spec)
    v = np.ones((2, 1))
    # d/de [0.4 (0.8 - e)^2 + 0.1 (1 + e/2)^2] at e = 0 with w_0 = -1.8 + e
    hand = (1 - 0.2) * (-1.8 + 1.0) + 0.2 * (0.0 + 1.0) * 0.5
    assert fd_gateaux(spec, 0, w, v, 1e-5, grid) == pytest.approx(hand, abs=1e-9)


def test_clipped_directions_are_reported(caplog):
    spec = GameSpec.build([0.0, 0.2], 0.3, horizon=0.5)
    grid = TimeGrid(0.5, 10)
    w = as_profile([1.0, 0.1], grid.n_nodes, spec)  # agent 0 sits on the upper face
    with caplog.at_level(logging.WARNING):
        fd_gateaux(spec, 0, w, np.ones((grid.n_nodes, 1)), 1e-5, grid)
    assert "clipped" in caplog.text


def test_fd_rejects_nonpositive_step():
    spec = GameSpec.build([0.0, 0.2], 0.3)
    with pytest.raises(ValidationError):
        fd_gateaux(spec, 0, np.zeros((201, 2, 1)), np.zeros((201, 1)), 0.0)


def test_brute_force_consensus_start_stays_put():
    spec = GameSpec.build([0.3, 0.3], [0.4, -0.2], horizon=0.3)
    res = brute_force_equilibrium(spec)
    np.testing.assert_allclose(res.levels, 0.3, atol=1e-12)


def test_brute_force_truthful_agents_track_their_own_state():
    spec = GameSpec.build([-0.35, 0.25], 0.0, horizon=0.3)
    res = brute_force_equilibrium(spec)
    grid = TimeGrid(0.3, 60)
    x = integrate_forward(spec, res.piecewise_profile(grid), grid)
    assert np.max(np.abs(res.levels - piece_averages(x, grid, 3))) <= res.cell / 2 + 1e-9


def test_brute_force_matches_the_solver_at_small_horizon():
    spec = _brute_force_spec(1)
    res = brute_force_equilibrium(spec)
    grid = TimeGrid(0.3, 60)
    sol = solve_fixed_point(spec, SolverConfig(n_steps=60), grid)
    assert np.max(np.abs(piece_averages(sol.controls, grid, 3) - res.levels)) <= 2.0 / 21


def test_brute_force_cycles_are_reported():
    # near-indifferent agents make exact discrete best responses alternate
    with pytest.raises(CycleDetected) as info:
        brute_force_equilibrium(_brute_force_spec(0))
    assert len(info.value.history) >= 2


def test_brute_force_limits():
    with pytest.raises(ValidationError):
        brute_force_equilibrium(GameSpec.build([0.0, 0.1, 0.2], 0.0))
    with pytest.raises(ValidationError):
        brute_force_equilibrium(GameSpec.build([0.0, 0.1], 0.0), pieces=4, levels=21)


def test_lipschitz_zero_perturbation_pairs_are_skipped():
    spec = GameSpec.build([0.0, 0.2], 0.0, horizon=0.5)
    grid = TimeGrid(0.5, 20)
    w = as_profile([0.0, 0.2], grid.n_nodes, spec)
    assert lipschitz_probe(spec, w, magnitude=0.0, grid=grid) == 0.0


def test_lipschitz_isolated_agents_are_insensitive():
    spec = GameSpec.build([-0.9, 0.9], 0.0, box=(-2, 2), horizon=1.0)
    grid = TimeGrid(1.0, 20)
    w = as_profile([-1.8, 1.8], grid.n_nodes, spec)
    assert lipschitz_probe(spec, w, grid=grid) == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_lipschitz_ratio_is_stable_across_magnitudes(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, n=3, horizon=1.0)
    grid = TimeGrid(1.0, 100)
    w = smooth_profile(rng, spec, grid)
    big = lipschitz_probe(spec, w, magnitude=1e-2, grid=grid, seed=seed)
    small = lipschitz_probe(spec, w, magnitude=1e-3, grid=grid, seed=seed)
    assert np.isfinite(big) and big > 0
    assert abs(big - small) / max(big, small) < 0.5


def test_fine_grid_error_shrinks_at_fourth_order():
    spec = GameSpec.build([-0.2, 0.1, 0.3], 0.0, horizon=1.0)
    fn = lambda t: np.array([[0.1 * t], [0.2 - 0.1 * t], [0.3]])  # noqa: E731
    coarse, fine = fine_grid_error(spec, fn, 100), fine_grid_error(spec, fn, 200)
    assert fine < 1e-9
    assert 10.0 < coarse / fine < 24.0
