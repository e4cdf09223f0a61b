"""Weighted-sum Pareto equilibria: the cooperative fixed-point map and diagnostics."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .adjoint import pair_jacobians, solve_adjoint_pareto
from .dynamics import check_profile, default_grid, eval_costs, integrate_forward, population_averages
from .iteration import Solution, SolverConfig, continuation, picard
from .model import GameSpec, ParetoWeights, TimeGrid, ValidationError
from .nash_solver import smooth_perturbation
from . import pointwise

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParetoCondition:
    holds: bool
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def check_pareto_condition(weights: ParetoWeights, spec: GameSpec) -> ParetoCondition:
    """Sufficient condition ``(1/N) sum_j theta_j delta_j < min_i theta_i (1 - delta_i)``."""
    theta = _weights(spec, weights)
    lhs = float(np.dot(theta, spec.delta) / spec.n_agents)
    rhs = float(np.min(theta * (1.0 - spec.delta)))
    return ParetoCondition(lhs < rhs, lhs, rhs)


def _weights(spec: GameSpec, weights: ParetoWeights) -> np.ndarray:
    if len(weights) != spec.n_agents:
        raise ValidationError(f"got {len(weights)} weights for {spec.n_agents} agents")
    return weights.theta


def _psi_update(spec: GameSpec, weights: ParetoWeights, rule: str = "projection"):
    theta = _weights(spec, weights)
    n = spec.n_agents
    td = theta * spec.delta
    scale = 1.0 / (theta * (1.0 - spec.delta))

    def update(spec_, controls, states, adjoint_states, grid):
        phi = solve_adjoint_pareto(spec_, weights, controls, adjoint_states, grid)
        if rule == "pointwise":
            return pointwise.pareto_update(spec_, theta, controls, states, phi)
        wbar = population_averages(controls)
        D = pair_jacobians(spec_, controls, states)
        adj = np.einsum("kjiba,kjb->kia", D, phi)
        pull = np.einsum("j,kjd->kd", td, wbar[:, None, :] - states) / n
        return spec_.project(states - scale[:, None] * (pull[:, None, :] + adj))

    return update


def psi_map(spec: GameSpec, weights: ParetoWeights, controls: np.ndarray,
            grid: TimeGrid | None = None) -> np.ndarray:
    """One application of the cooperative map to a control profile.

    ``P(x_i - 1/(theta_i (1-delta_i)) [(1/N) sum_j theta_j delta_j (wbar - x_j) + sum_j DK(w_i - x_j)^T phi_j])``
    """
    controls = np.asarray(controls, dtype=float)
    grid = grid or default_grid(spec, controls)
    check_profile(spec, controls, grid)
    x = integrate_forward(spec, controls, grid)
    return _psi_update(spec, weights)(spec, controls, x, x, grid)


def _note_condition(spec: GameSpec, weights: ParetoWeights, sol: Solution) -> Solution:
    cond = check_pareto_condition(weights, spec)
    if not cond.holds:
        msg = f"solvability condition fails (lhs {cond.lhs:.4g} >= rhs {cond.rhs:.4g})"
        log.warning(msg)
        sol.report.notes.append(msg)
    return sol


def solve_pareto(spec: GameSpec, weights: ParetoWeights, config: SolverConfig | None = None,
                 grid: TimeGrid | None = None) -> Solution:
    """Minimize ``sum_i theta_i J_i`` by Picard iteration with time continuation.

    A failing solvability condition is logged and noted in the report; the
    condition is sufficient only, so the solve proceeds.
    """
    config = config or SolverConfig()
    update = _psi_update(spec, weights, config.update)

    def segment(s, g):
        return picard(s, g, config, update)

    return _note_condition(spec, weights, continuation(spec, config, segment, grid))


def solve_pareto_fixed_point(spec: GameSpec, weights: ParetoWeights, config: SolverConfig | None = None,
                             grid: TimeGrid | None = None) -> Solution:
    """Single Picard solve on the whole horizon, without continuation."""
    config = config or SolverConfig()
    grid = grid or TimeGrid(spec.horizon, config.n_steps or 200)
    sol = picard(spec, grid, config, _psi_update(spec, weights, config.update))
    return _note_condition(spec, weights, sol)


@dataclass
class DominanceReport:
    candidate_costs: np.ndarray
    n_challengers: int
    dominating: list
    best_gains: np.ndarray

    @property
    def passed(self) -> bool:
        return not self.dominating


def pareto_dominance_check(spec: GameSpec, candidate: np.ndarray, n_challengers: int = 100,
                           magnitude: float = 0.1, grid: TimeGrid | None = None,
                           seed: int | np.random.Generator | None = 0, atol: float = 1e-12) -> DominanceReport:
    """Search nearby admissible profiles for one that Pareto-dominates ``candidate``.

    Each challenger perturbs every agent by an independent smooth path of sup
    norm at most ``magnitude`` and is projected into the boxes. A challenger
    dominates when no agent is worse off (beyond ``atol``) and one is strictly
    better off. ``best_gains`` holds, per challenger, the smallest cost decrease
    over agents; a positive entry means a dominating profile.
    """
    candidate = np.asarray(candidate, dtype=float)
    grid = grid or default_grid(spec, candidate)
    rng = np.random.default_rng(seed)
    base = eval_costs(spec, candidate, integrate_forward(spec, candidate, grid), grid)
    dominating, gains = [], np.empty(n_challengers)
    for c in range(n_challengers):
        trial = candidate.copy()
        for i in range(spec.n_agents):
            trial[:, i] += smooth_perturbation(rng, grid.nodes, grid.horizon, spec.dim, magnitude)
        trial = spec.project(trial)
        costs = eval_costs(spec, trial, integrate_forward(spec, trial, grid), grid)
        gain = base - costs
        gains[c] = gain.min()
        if np.all(gain >= -atol) and np.any(gain > atol):
            dominating.append(c)
    return DominanceReport(base, n_challengers, dominating, gains)


@dataclass
class ParetoTerminalReport:
    """Terminal weighted identity under two readings.

    ``residual_normalized``: ``|(1/N) sum theta delta * sum a - sum theta delta a|``.
    ``residual_literal``: the same without the ``1/N`` factor.
    """

    all_boundary: bool
    residual_normalized: float
    residual_literal: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return self.all_boundary or self.residual_normalized <= self.tolerance

    def to_dict(self) -> dict:
        return {"all_boundary": self.all_boundary, "residual_normalized": self.residual_normalized,
                "residual_literal": self.residual_literal, "tolerance": self.tolerance,
                "holds": self.holds}


def check_pareto_terminal(spec: GameSpec, states: np.ndarray, controls: np.ndarray,
                          weights: ParetoWeights, tolerance: float = 0.05) -> ParetoTerminalReport:
    """Weighted identity at the terminal point ``a_i = (x_i(T) + w_i(T)) / 2``."""
    theta = _weights(spec, weights)
    a = 0.5 * (np.asarray(states)[-1] + np.asarray(controls)[-1])
    on_face = (np.abs(a - spec.box_lo) <= tolerance) | (np.abs(a - spec.box_hi) <= tolerance)
    all_boundary = bool(np.all(np.any(on_face, axis=-1)))
    td = theta * spec.delta
    weighted = td @ a
    total = a.sum(axis=0)
    normalized = float(np.max(np.abs(td.sum() / spec.n_agents * total - weighted)))
    literal = float(np.max(np.abs(td.sum() * total - weighted)))
    return ParetoTerminalReport(all_boundary, normalized, literal, tolerance)
