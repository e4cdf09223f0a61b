"""Forward integration of the true judgments and evaluation of the costs."""
from __future__ import annotations

import numpy as np

from .model import GameSpec, KernelSpec, TimeGrid, ValidationError, eval_K


def default_grid(spec: GameSpec, controls: np.ndarray | None = None) -> TimeGrid:
    if controls is not None:
        return TimeGrid(spec.horizon, controls.shape[0] - 1)
    return TimeGrid(spec.horizon, 200)


def check_profile(spec: GameSpec, profile: np.ndarray, grid: TimeGrid, what: str = "controls"):
    expected = (grid.n_nodes, spec.n_agents, spec.dim)
    if profile.shape != expected:
        raise ValidationError(f"{what} have shape {profile.shape}, expected {expected}")
    if abs(grid.horizon - spec.horizon) > 1e-12 * max(1.0, spec.horizon):
        raise ValidationError(
            f"grid horizon {grid.horizon} does not match the game horizon {spec.horizon}"
        )


def drift(kernel: KernelSpec, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``sum_j K(w_j - x_i)`` for states ``x`` and expressions ``w`` of shape ``(..., N, d)``."""
    z = w[..., None, :, :] - x[..., :, None, :]
    return eval_K(kernel, z).sum(axis=-2)


def hermite_midpoints(values: np.ndarray, slopes: np.ndarray, h: float) -> np.ndarray:
    """Cubic Hermite interpolant at the half steps from node values and time derivatives."""
    return 0.5 * (values[:-1] + values[1:]) + (h / 8.0) * (slopes[:-1] - slopes[1:])


def state_midpoints(spec: GameSpec, controls: np.ndarray, states: np.ndarray, h: float) -> np.ndarray:
    return hermite_midpoints(states, drift(spec.kernel, states, controls), h)


def integrate_panels(f_nodes: np.ndarray, f_mid: np.ndarray, h: float) -> np.ndarray:
    """Simpson's rule on every grid interval, using the node and half-step values.

    Reduces over the leading (time) axis.
    """
    return (h / 6.0) * (f_nodes[:-1].sum(axis=0) + 4.0 * f_mid.sum(axis=0) + f_nodes[1:].sum(axis=0))


def integrate_forward(spec: GameSpec, controls: np.ndarray, grid: TimeGrid | None = None) -> np.ndarray:
    """Classical RK4 on the grid; controls are linearly interpolated at the half steps."""
    grid = grid or default_grid(spec, controls)
    check_profile(spec, controls, grid)
    h = grid.step
    kern = spec.kernel
    x = np.empty_like(controls)
    x[0] = spec.initial_judgments
    mid = 0.5 * (controls[:-1] + controls[1:])
    for k in range(grid.n_steps):
        xk = x[k]
        k1 = drift(kern, xk, controls[k])
        k2 = drift(kern, xk + 0.5 * h * k1, mid[k])
        k3 = drift(kern, xk + 0.5 * h * k2, mid[k])
        k4 = drift(kern, xk + h * k3, controls[k + 1])
        x[k + 1] = xk + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def population_averages(profile: np.ndarray) -> np.ndarray:
    """Mean over agents at each node: ``(n_nodes, N, d) -> (n_nodes, d)``."""
    profile = np.asarray(profile, dtype=float)
    if profile.ndim != 3 or profile.shape[1] == 0:
        raise ValidationError("profile must be a nonempty (n_nodes, N, d) array")
    return profile.mean(axis=1)


def cost_integrands(spec: GameSpec, controls: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Running cost of every agent at every node, shape ``(n_nodes, N)``."""
    wbar = population_averages(controls)
    xbar = population_averages(states)
    dissonance = np.sum((controls - states) ** 2, axis=-1)
    to_average = np.sum((wbar[:, None, :] - states) ** 2, axis=-1)
    lam = spec.lam.value(xbar)
    return (0.5 * (1.0 - spec.delta) * dissonance + 0.5 * spec.delta * to_average
            + spec.zeta * lam[:, None])


def eval_costs(spec: GameSpec, controls: np.ndarray, states: np.ndarray,
               grid: TimeGrid | None = None) -> np.ndarray:
    """All agents' costs ``J_i``, Simpson's rule on each grid interval.

    Controls are piecewise linear in time, so their half-step values are exact
    averages; half-step states use the cubic Hermite interpolant built from the
    drift at the nodes.
    """
    grid = grid or default_grid(spec, controls)
    check_profile(spec, controls, grid)
    check_profile(spec, states, grid, "states")
    h = grid.step
    w_mid = 0.5 * (controls[:-1] + controls[1:])
    x_mid = state_midpoints(spec, controls, states, h)
    return integrate_panels(cost_integrands(spec, controls, states),
                            cost_integrands(spec, w_mid, x_mid), h)


def eval_cost(spec: GameSpec, i: int, controls: np.ndarray, states: np.ndarray,
              grid: TimeGrid | None = None) -> float:
    if not 0 <= i < spec.n_agents:
        raise IndexError(f"agent index {i} out of range for N = {spec.n_agents}")
    return float(eval_costs(spec, controls, states, grid)[i])


def eval_intensity_integral(spec: GameSpec, states: np.ndarray, grid: TimeGrid | None = None,
                            controls: np.ndarray | None = None) -> float:
    """Expected number of exogenous events, ``int_0^T lambda(xbar) dt``.

    With ``controls`` given, half-step states come from the Hermite interpolant
    (as in :func:`eval_costs`); otherwise they are linear interpolants.
    """
    if spec.lam.variant == "affine-decreasing" and spec.dim != 1:
        raise ValidationError("the affine intensity is only defined for dim == 1")
    grid = grid or default_grid(spec, states)
    check_profile(spec, states, grid, "states")
    if controls is None:
        x_mid = 0.5 * (states[:-1] + states[1:])
    else:
        x_mid = state_midpoints(spec, controls, states, grid.step)
    lam = spec.lam
    return float(integrate_panels(lam.value(population_averages(states)),
                                  lam.value(population_averages(x_mid)), grid.step))
