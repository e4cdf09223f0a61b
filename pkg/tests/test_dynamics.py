import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_spec, smooth_profile
from opinion_game import (GameSpec, KernelSpec, LambdaSpec, TimeGrid, ValidationError, eval_cost,
                          eval_costs, eval_intensity_integral, integrate_forward, population_averages)
from opinion_game.model import as_profile
from opinion_game.verification import reference_costs, reference_states


def test_consensus_is_stationary():
    spec = GameSpec.build([0.3, 0.3, 0.3], 0.0, horizon=2.0)
    grid = TimeGrid(2.0, 50)
    x = integrate_forward(spec, as_profile([0.3] * 3, grid.n_nodes, spec), grid)
    assert np.all(x == 0.3)


def test_far_controls_leave_states_unchanged():
    spec = GameSpec.build([-0.9, 0.9], 0.0, box=(-2, 2), horizon=1.0)
    grid = TimeGrid(1.0, 20)
    x = integrate_forward(spec, as_profile([-1.5, 1.5], grid.n_nodes, spec), grid)
    np.testing.assert_array_equal(x[-1, :, 0], [-0.9, 0.9])


def test_shape_and_horizon_mismatch_raise():
    spec = GameSpec.build([0.0, 0.1], 0.0, horizon=1.0)
    with pytest.raises(ValidationError, match="shape"):
        integrate_forward(spec, np.zeros((11, 3, 1)), TimeGrid(1.0, 10))
    with pytest.raises(ValidationError, match="horizon"):
        integrate_forward(spec, np.zeros((11, 2, 1)), TimeGrid(2.0, 10))


def test_population_average_rejects_empty():
    with pytest.raises(ValidationError):
        population_averages(np.zeros((3, 0, 1)))
    np.testing.assert_allclose(population_averages(np.array([[[1.0], [3.0]]])), [[2.0]])


def test_costs_of_a_frozen_quadratic_setup():
    # states do not move (controls out of reach) so costs are T times the integrand
    spec = GameSpec.build([-1.0, 1.0], [0.2, -0.3], box=(-2, 2), horizon=1.5)
    grid = TimeGrid(1.5, 3)
    w = as_profile([-1.8, 1.8], grid.n_nodes, spec)
    x = integrate_forward(spec, w, grid)
    J = eval_costs(spec, w, x, grid)
    expected0 = 1.5 * (0.8 / 2 * 0.64 + 0.2 / 2 * 1.0)
    expected1 = 1.5 * (1.3 / 2 * 0.64 - 0.3 / 2 * 1.0)
    np.testing.assert_allclose(J, [expected0, expected1], rtol=1e-14)
    assert eval_cost(spec, 1, w, x, grid) == J[1]
    with pytest.raises(IndexError):
        eval_cost(spec, 2, w, x, grid)


def test_exogenous_term_adds_zeta_times_intensity_integral():
    rng = np.random.default_rng(3)
    base = random_spec(rng, n=3, exogenous=False)
    lam = LambdaSpec("affine-decreasing", 0.5, 1.3)
    zeta = np.array([0.0, 1.0, 2.5])
    spec = GameSpec.build(base.initial_judgments, base.delta, zeta, horizon=base.horizon, lam=lam)
    grid = TimeGrid(spec.horizon, 40)
    w = smooth_profile(rng, spec, grid)
    x = integrate_forward(spec, w, grid)
    extra = eval_costs(spec, w, x, grid) - eval_costs(base, w, x, grid)
    np.testing.assert_allclose(extra, zeta * eval_intensity_integral(spec, x, grid, w), rtol=1e-12)


def test_intensity_integral_of_constant_lambda():
    spec = GameSpec.build([0.0, 0.5], 0.0, horizon=2.0, lam=LambdaSpec("constant", 3.0))
    grid = TimeGrid(2.0, 10)
    x = integrate_forward(spec, as_profile([0.0, 0.5], grid.n_nodes, spec), grid)
    assert eval_intensity_integral(spec, x, grid) == pytest.approx(6.0)


@pytest.mark.parametrize("seed", range(3))
def test_states_match_refined_reference(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, n=3, horizon=1.0)
    grid = TimeGrid(1.0, 100)
    w = smooth_profile(rng, spec, grid)
    ref = reference_states(spec, w, grid, 50)[::50]
    np.testing.assert_allclose(integrate_forward(spec, w, grid), ref, atol=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_costs_match_refined_reference(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, n=3, horizon=1.0)
    grid = TimeGrid(1.0, 100)
    w = smooth_profile(rng, spec, grid)
    main = eval_costs(spec, w, integrate_forward(spec, w, grid), grid)
    np.testing.assert_allclose(main, reference_costs(spec, w, grid, 50), rtol=1e-6)


def test_rk4_error_is_fourth_order():
    rng = np.random.default_rng(7)
    spec = random_spec(rng, n=3, horizon=1.0, exogenous=False)

    # affine in time, so every grid represents the same control exactly
    def controls(t):
        return np.array([[0.3 * t - 0.2], [0.2 - 0.1 * t], [0.4 - 0.3 * t]])

    def error(steps):
        fine = TimeGrid(1.0, steps * 64)
        ref = integrate_forward(spec, np.array([controls(t) for t in fine.nodes]), fine)[-1]
        g = TimeGrid(1.0, steps)
        return np.max(np.abs(integrate_forward(spec, np.array([controls(t) for t in g.nodes]), g)[-1] - ref))

    ratio = error(10) / error(20)
    assert 10 < ratio < 24


@given(st.integers(0, 10_000), st.integers(1, 2), st.floats(0.2, 2.0))
def test_states_stay_in_the_box_hull(seed, dim, radius):
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-1, 1, size=(4, dim))
    spec = GameSpec.build(x0, 0.0, horizon=3.0, kernel=KernelSpec(0.1, radius))
    grid = TimeGrid(3.0, 60)
    w = rng.uniform(-1, 1, size=(grid.n_nodes, 4, dim))
    x = integrate_forward(spec, w, grid)
    assert np.max(np.abs(x)) <= 1.0 + 1e-9


@given(st.integers(0, 10_000))
def test_order_of_true_judgments_is_preserved(seed):
    rng = np.random.default_rng(seed)
    x0 = np.sort(rng.uniform(-1, 1, size=5))
    spec = GameSpec.build(x0, 0.0, horizon=2.0)
    grid = TimeGrid(2.0, 80)
    w = rng.uniform(-1, 1, size=(grid.n_nodes, 5, 1))
    x = integrate_forward(spec, w, grid)[..., 0]
    assert np.all(np.diff(x, axis=1) >= -1e-9)
