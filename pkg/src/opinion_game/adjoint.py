"""Backward costate integration and adjoint-based gradients.

Both costate systems share the form ``phi' = A(t)^T phi - g(t)`` with
``phi(T) = 0``, where ``A_j = sum_l DK(w_l - x_j)`` and ``g`` is the driver.
They are integrated backward with RK4. Controls at half steps are exact
averages (controls are piecewise linear); states at half steps come from the
cubic Hermite interpolant, the same one the cost quadrature uses.
"""
from __future__ import annotations

import numpy as np

from .dynamics import (check_profile, default_grid, hermite_midpoints, integrate_panels,
                       population_averages, state_midpoints)
from .model import GameSpec, ParetoWeights, TimeGrid, ValidationError, jacobian_K


def pair_jacobians(spec: GameSpec, controls: np.ndarray, states: np.ndarray) -> np.ndarray:
    """``D[..., j, l] = DK(w_l - x_j)``, shape ``(..., N, N, d, d)``."""
    z = controls[..., None, :, :] - states[..., :, None, :]
    return jacobian_K(spec.kernel, z)


def _midpoints(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a[:-1] + a[1:])


def _integrate_backward(A_nodes, A_mid, g_nodes, g_mid, h, transpose_op):
    """RK4 backward from a zero terminal value.

    ``transpose_op(A, phi)`` applies ``A^T`` row by row.
    """
    n_nodes = g_nodes.shape[0]
    phi = np.zeros_like(g_nodes)

    def rhs(A, g, p):
        return transpose_op(A, p) - g

    for k in range(n_nodes - 2, -1, -1):
        p = phi[k + 1]
        k1 = rhs(A_nodes[k + 1], g_nodes[k + 1], p)
        k2 = rhs(A_mid[k], g_mid[k], p - 0.5 * h * k1)
        k3 = rhs(A_mid[k], g_mid[k], p - 0.5 * h * k2)
        k4 = rhs(A_nodes[k], g_nodes[k], p - h * k3)
        phi[k] = p - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return phi


def _half_steps(spec, controls, states, h):
    return _midpoints(controls), state_midpoints(spec, controls, states, h)


def _coupling(spec, controls, states):
    return pair_jacobians(spec, controls, states).sum(axis=-3)


def _nash_driver(spec: GameSpec, controls, states):
    """``g[k, j, i] = 1{i=j} (x_i - delta_i wbar - (1-delta_i) w_i) + zeta_i/N grad lambda(xbar)``."""
    n = spec.n_agents
    wbar = population_averages(controls)
    xbar = population_averages(states)
    own = states - spec.delta[:, None] * wbar[:, None, :] - (1.0 - spec.delta)[:, None] * controls
    exo = (spec.zeta / n)[None, :, None] * spec.lam.gradient(xbar)[:, None, :]
    g = np.broadcast_to(exo[:, None, :, :], (controls.shape[0], n, n, spec.dim)).copy()
    idx = np.arange(n)
    g[:, idx, idx, :] += own
    return g


def _nash_transpose(A, phi):
    # A: (..., N_j, d, d), phi: (..., N_j, N_i, d) -> A_j^T phi_ji
    return np.einsum("...jba,...jib->...jia", A, phi)


def solve_adjoint_nash(spec: GameSpec, controls: np.ndarray, states: np.ndarray,
                       grid: TimeGrid | None = None, agent: int | None = None) -> np.ndarray:
    """Nash costates ``phi[k, j, i]`` for every target agent ``i``.

    With ``agent`` given, only that target's rows ``phi[k, j]`` are returned.
    Rows ``j != i`` with ``zeta_i == 0`` come out exactly zero: their driver
    vanishes identically.
    """
    grid = grid or default_grid(spec, controls)
    check_profile(spec, controls, grid)
    check_profile(spec, states, grid, "states")
    if agent is not None and not 0 <= agent < spec.n_agents:
        raise IndexError(f"agent index {agent} out of range for N = {spec.n_agents}")
    w_mid, x_mid = _half_steps(spec, controls, states, grid.step)
    A, A_mid = _coupling(spec, controls, states), _coupling(spec, w_mid, x_mid)
    g = _nash_driver(spec, controls, states)
    g_mid = _nash_driver(spec, w_mid, x_mid)
    phi = _integrate_backward(A, A_mid, g, g_mid, grid.step, _nash_transpose)
    return phi if agent is None else phi[:, :, agent, :]


def _pareto_driver(spec: GameSpec, theta, controls, states):
    n = spec.n_agents
    wbar = population_averages(controls)
    xbar = population_averages(states)
    own = states - (1.0 - spec.delta)[:, None] * controls - spec.delta[:, None] * wbar[:, None, :]
    exo = np.dot(theta, spec.zeta) / n * spec.lam.gradient(xbar)
    return theta[:, None] * own + exo[:, None, :]


def _pareto_transpose(A, phi):
    return np.einsum("...jba,...jb->...ja", A, phi)


def _check_weights(spec: GameSpec, weights: ParetoWeights) -> np.ndarray:
    if len(weights) != spec.n_agents:
        raise ValidationError(f"got {len(weights)} weights for {spec.n_agents} agents")
    return weights.theta


def solve_adjoint_pareto(spec: GameSpec, weights: ParetoWeights, controls: np.ndarray,
                         states: np.ndarray, grid: TimeGrid | None = None) -> np.ndarray:
    """Shared costates ``phi[k, j]`` of the weighted-sum problem."""
    grid = grid or default_grid(spec, controls)
    check_profile(spec, controls, grid)
    check_profile(spec, states, grid, "states")
    theta = _check_weights(spec, weights)
    w_mid, x_mid = _half_steps(spec, controls, states, grid.step)
    A, A_mid = _coupling(spec, controls, states), _coupling(spec, w_mid, x_mid)
    g = _pareto_driver(spec, theta, controls, states)
    g_mid = _pareto_driver(spec, theta, w_mid, x_mid)
    return _integrate_backward(A, A_mid, g, g_mid, grid.step, _pareto_transpose)


def nash_gradient(spec: GameSpec, controls: np.ndarray, states: np.ndarray,
                  phi: np.ndarray) -> np.ndarray:
    """Gradient density of ``J_i`` with respect to ``w_i``, for all ``i`` at once.

    ``G[k, i] = (1-delta_i)(w_i - x_i) + delta_i/N (wbar - x_i) + sum_j DK(w_i - x_j)^T phi_ji``.
    """
    n = spec.n_agents
    wbar = population_averages(controls)
    D = pair_jacobians(spec, controls, states)
    adj = np.einsum("kjiba,kjib->kia", D, phi)
    return ((1.0 - spec.delta)[:, None] * (controls - states)
            + (spec.delta / n)[:, None] * (wbar[:, None, :] - states) + adj)


def pareto_gradient(spec: GameSpec, weights: ParetoWeights, controls: np.ndarray,
                    states: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Gradient density of ``sum_k theta_k J_k`` with respect to each ``w_i``."""
    theta = _check_weights(spec, weights)
    n = spec.n_agents
    wbar = population_averages(controls)
    D = pair_jacobians(spec, controls, states)
    adj = np.einsum("kjiba,kjb->kia", D, phi)
    pull = np.einsum("j,kjd->kd", theta * spec.delta, wbar[:, None, :] - states) / n
    return (theta * (1.0 - spec.delta))[:, None] * (controls - states) + pull[:, None, :] + adj


def _nash_phi_midpoints(spec, controls, states, phi, h):
    slope = _nash_transpose(_coupling(spec, controls, states), phi) - _nash_driver(spec, controls, states)
    return hermite_midpoints(phi, slope, h)


def _pareto_phi_midpoints(spec, theta, controls, states, phi, h):
    slope = (_pareto_transpose(_coupling(spec, controls, states), phi)
             - _pareto_driver(spec, theta, controls, states))
    return hermite_midpoints(phi, slope, h)


def gateaux_derivative(spec: GameSpec, i: int, controls: np.ndarray, states: np.ndarray,
                       phi: np.ndarray, direction: np.ndarray,
                       grid: TimeGrid | None = None) -> float:
    """Directional derivative of ``J_i`` along ``direction`` (shape ``(n_nodes, d)``) of ``w_i``.

    ``phi`` is the full Nash costate array from :func:`solve_adjoint_nash`.
    The time integral uses the same per-interval Simpson rule as the costs.
    """
    grid = grid or default_grid(spec, controls)
    if not 0 <= i < spec.n_agents:
        raise IndexError(f"agent index {i} out of range for N = {spec.n_agents}")
    direction = np.asarray(direction, dtype=float).reshape(grid.n_nodes, spec.dim)
    h = grid.step
    w_mid, x_mid = _half_steps(spec, controls, states, h)
    phi_mid = _nash_phi_midpoints(spec, controls, states, phi, h)
    G = nash_gradient(spec, controls, states, phi)[:, i, :]
    G_mid = nash_gradient(spec, w_mid, x_mid, phi_mid)[:, i, :]
    return float(integrate_panels(np.sum(direction * G, axis=-1),
                                  np.sum(_midpoints(direction) * G_mid, axis=-1), h))


def pareto_gateaux_derivative(spec: GameSpec, weights: ParetoWeights, controls: np.ndarray,
                              states: np.ndarray, phi: np.ndarray, direction: np.ndarray,
                              grid: TimeGrid | None = None) -> float:
    """Directional derivative of ``sum_k theta_k J_k`` along a full-profile direction."""
    grid = grid or default_grid(spec, controls)
    direction = np.asarray(direction, dtype=float)
    check_profile(spec, direction, grid, "direction")
    theta = _check_weights(spec, weights)
    h = grid.step
    w_mid, x_mid = _half_steps(spec, controls, states, h)
    phi_mid = _pareto_phi_midpoints(spec, theta, controls, states, phi, h)
    H = pareto_gradient(spec, weights, controls, states, phi)
    H_mid = pareto_gradient(spec, weights, w_mid, x_mid, phi_mid)
    return float(integrate_panels(np.sum(direction * H, axis=(-1, -2)),
                                  np.sum(_midpoints(direction) * H_mid, axis=(-1, -2)), h))
