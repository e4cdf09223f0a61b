"""Open-loop Nash equilibria: the projected fixed-point map and its solvers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adjoint import pair_jacobians, solve_adjoint_nash
from .dynamics import check_profile, default_grid, eval_costs, integrate_forward, population_averages
from .iteration import NonConvergence, Solution, SolveReport, SolverConfig, continuation, picard
from .model import GameSpec, TimeGrid
from . import pointwise

__all__ = ["NonConvergence", "SolveReport", "SolverConfig", "Solution", "phi_map", "solve_fixed_point",
           "solve_continuation", "best_response_check", "check_terminal_consensus", "contraction_ratio"]


def _phi_update(spec: GameSpec, controls, states, adjoint_states, grid) -> np.ndarray:
    n = spec.n_agents
    phi = solve_adjoint_nash(spec, controls, adjoint_states, grid)
    return _projected(spec, controls, states, phi, n)


def _pointwise_update(spec: GameSpec, controls, states, adjoint_states, grid) -> np.ndarray:
    phi = solve_adjoint_nash(spec, controls, adjoint_states, grid)
    return pointwise.nash_update(spec, controls, states, phi)


def _update_for(config: SolverConfig):
    return _pointwise_update if config.update == "pointwise" else _phi_update


def _projected(spec: GameSpec, controls, states, phi, n) -> np.ndarray:
    wbar = population_averages(controls)
    D = pair_jacobians(spec, controls, states)
    adj = np.einsum("kjiba,kjib->kia", D, phi)
    scale = 1.0 / (1.0 - spec.delta)
    pull = (spec.delta * scale / n)[:, None] * (wbar[:, None, :] - states)
    return spec.project(states - pull - scale[:, None] * adj)


def phi_map(spec: GameSpec, controls: np.ndarray, grid: TimeGrid | None = None) -> np.ndarray:
    """One application of the projected best-response map to a control profile.

    ``P(x_i - delta_i/((1-delta_i) N) (wbar - x_i) - 1/(1-delta_i) sum_j DK(w_i - x_j)^T phi_ji)``
    evaluated at every grid node.
    """
    controls = np.asarray(controls, dtype=float)
    grid = grid or default_grid(spec, controls)
    check_profile(spec, controls, grid)
    x = integrate_forward(spec, controls, grid)
    return _phi_update(spec, controls, x, x, grid)


def contraction_ratio(spec: GameSpec) -> np.ndarray:
    """Per-agent ``|delta_i| / (N |1 - delta_i|)``; values below one give the small-horizon contraction."""
    return np.abs(spec.delta) / (spec.n_agents * np.abs(1.0 - spec.delta))


def solve_fixed_point(spec: GameSpec, config: SolverConfig | None = None, grid: TimeGrid | None = None,
                      initial: np.ndarray | None = None) -> Solution:
    """Picard iteration on the whole horizon, seeded with truthful controls."""
    config = config or SolverConfig()
    if grid is None:
        grid = TimeGrid(spec.horizon, config.n_steps or 200)
    return picard(spec, grid, config, _update_for(config), initial)


def solve_continuation(spec: GameSpec, config: SolverConfig | None = None,
                       grid: TimeGrid | None = None) -> Solution:
    """Chain fixed-point solves over segments of length ``T / M`` into a polygonal control."""
    config = config or SolverConfig()
    return continuation(spec, config, lambda s, g: solve_fixed_point(s, config, g), grid)


@dataclass
class DeviationReport:
    agent: int
    baseline_cost: float
    min_difference: float
    slack: float
    differences: np.ndarray

    @property
    def passed(self) -> bool:
        return self.min_difference >= -self.slack


def smooth_perturbation(rng: np.random.Generator, nodes: np.ndarray, horizon: float, dim: int,
                        magnitude: float, n_modes: int = 4) -> np.ndarray:
    """Random low-frequency path of sup norm ``magnitude``, shape ``(n_nodes, dim)``."""
    s = nodes / horizon
    freq = np.arange(n_modes)
    basis = np.cos(np.pi * freq[None, :] * s[:, None])
    coef = rng.normal(size=(n_modes, dim)) / (1.0 + freq)[:, None]
    v = basis @ coef
    peak = np.max(np.abs(v))
    return v * (magnitude / peak) if peak > 0 else v


def best_response_check(spec: GameSpec, i: int, equilibrium: np.ndarray, n_trials: int = 20,
                        magnitude: float = 0.1, grid: TimeGrid | None = None,
                        seed: int | np.random.Generator | None = 0) -> DeviationReport:
    """Sample unilateral deviations of agent ``i`` and compare its cost.

    Perturbations are smooth random paths of sup norm at most ``magnitude``,
    projected back into the agent's box, so the deviation is admissible.
    """
    if not 0 <= i < spec.n_agents:
        raise IndexError(f"agent index {i} out of range for N = {spec.n_agents}")
    equilibrium = np.asarray(equilibrium, dtype=float)
    grid = grid or default_grid(spec, equilibrium)
    rng = np.random.default_rng(seed)
    base = eval_costs(spec, equilibrium, integrate_forward(spec, equilibrium, grid), grid)[i]
    diffs = np.empty(n_trials)
    for t in range(n_trials):
        trial = equilibrium.copy()
        trial[:, i] += smooth_perturbation(rng, grid.nodes, grid.horizon, spec.dim, magnitude)
        trial = spec.project(trial)
        cost = eval_costs(spec, trial, integrate_forward(spec, trial, grid), grid)[i]
        diffs[t] = cost - base
    return DeviationReport(i, float(base), float(diffs.min()) if n_trials else 0.0,
                           1e-4 * (1.0 + abs(base)), diffs)


@dataclass
class ConsensusReport:
    """Terminal classification: ``interior[i]`` is False when agent ``i`` sits on its box boundary."""

    interior: np.ndarray
    terminal_states: np.ndarray
    terminal_controls: np.ndarray
    interior_mean: np.ndarray | None
    max_spread: float
    max_gap: float
    tolerance: float

    @property
    def consistent(self) -> bool:
        return self.max_spread <= self.tolerance and self.max_gap <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "interior": self.interior.tolist(),
            "terminal_states": self.terminal_states.tolist(),
            "terminal_controls": self.terminal_controls.tolist(),
            "interior_mean": None if self.interior_mean is None else self.interior_mean.tolist(),
            "max_spread": self.max_spread,
            "max_gap": self.max_gap,
            "tolerance": self.tolerance,
            "consistent": self.consistent,
        }


def check_terminal_consensus(spec: GameSpec, states: np.ndarray, controls: np.ndarray,
                             tolerance: float = 0.05, boundary_tol: float | None = None) -> ConsensusReport:
    """Split agents into boundary-pinned and interior ones at ``T``.

    An agent is pinned when its terminal expressed judgment lies within
    ``boundary_tol`` (default ``tolerance``) of a face of its box. Interior
    agents should agree with each other and express truthfully; the spread
    from their mean and the gap ``|x_i(T) - w_i(T)|`` are measured in sup norm.
    """
    boundary_tol = tolerance if boundary_tol is None else boundary_tol
    xT, wT = np.asarray(states)[-1], np.asarray(controls)[-1]
    near = (np.abs(wT - spec.box_lo) <= boundary_tol) | (np.abs(wT - spec.box_hi) <= boundary_tol)
    interior = ~np.any(near, axis=-1)
    if interior.any():
        mean = wT[interior].mean(axis=0)
        spread = float(np.max(np.abs(wT[interior] - mean)))
        gap = float(np.max(np.abs(xT[interior] - wT[interior])))
    else:
        mean, spread, gap = None, 0.0, 0.0
    return ConsensusReport(interior, xT, wT, mean, spread, gap, tolerance)

