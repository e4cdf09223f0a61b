"""Oracle battery run by ``opinion-game verify`` on a scenario's parameters.

The checks use short horizons so they finish in seconds whatever the scenario's
own horizon is: adjoint versus finite differences at two steps, the stability
probe at two magnitudes, the main integrator against the refined reference
(d = 1), and for N = 2, d = 1 the brute-force discrete equilibrium.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from .adjoint import (gateaux_derivative, pareto_gateaux_derivative, solve_adjoint_nash,
                      solve_adjoint_pareto)
from .dynamics import eval_costs, integrate_forward
from .iteration import NonConvergence, SolverConfig
from .model import TimeGrid
from .nash_solver import smooth_perturbation, solve_fixed_point
from .verification import (CycleDetected, brute_force_equilibrium, fd_gateaux, lipschitz_probe,
                           piece_averages, reference_costs, rel_error)

GRADIENT_HORIZON = 0.5
GRADIENT_STEPS = 200
BRUTE_FORCE_HORIZON = 0.3
FD_STEPS = (1e-4, 1e-6)


def _interior_controls(spec, grid, rng):
    # random admissible profile kept away from the box faces so FD needs no clipping
    lo, hi = spec.box_lo, spec.box_hi
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    w = np.empty((grid.n_nodes, spec.n_agents, spec.dim))
    for i in range(spec.n_agents):
        w[:, i] = smooth_perturbation(rng, grid.nodes, grid.horizon, spec.dim, 1.0)
    return mid + 0.6 * half * w


def gradient_check(scenario, seed: int = 0, n_directions: int = 4) -> dict:
    spec = dataclasses.replace(scenario.game, horizon=min(scenario.game.horizon, GRADIENT_HORIZON))
    grid = TimeGrid(spec.horizon, GRADIENT_STEPS)
    rng = np.random.default_rng(seed)
    w = _interior_controls(spec, grid, rng)
    x = integrate_forward(spec, w, grid)
    worst = {h: 0.0 for h in FD_STEPS}
    if scenario.mode == "nash":
        phi = solve_adjoint_nash(spec, w, x, grid)
        for i in range(spec.n_agents):
            for _ in range(n_directions):
                v = smooth_perturbation(rng, grid.nodes, grid.horizon, spec.dim, 0.1)
                exact = gateaux_derivative(spec, i, w, x, phi, v, grid)
                for h in FD_STEPS:
                    worst[h] = max(worst[h], rel_error(exact, fd_gateaux(spec, i, w, v, h, grid)))
    else:
        phi = solve_adjoint_pareto(spec, scenario.weights, w, x, grid)
        for _ in range(n_directions * spec.n_agents):
            v = np.stack([smooth_perturbation(rng, grid.nodes, grid.horizon, spec.dim, 0.1)
                          for _ in range(spec.n_agents)], axis=1)
            exact = pareto_gateaux_derivative(spec, scenario.weights, w, x, phi, v, grid)
            for h in FD_STEPS:
                fd = fd_gateaux(spec, None, w, v, h, grid, weights=scenario.weights)
                worst[h] = max(worst[h], rel_error(exact, fd))
    return {"horizon": spec.horizon, "max_rel_error": {f"{h:g}": e for h, e in worst.items()},
            "passed": all(e <= 1e-4 for e in worst.values())}


def stability_check(scenario, seed: int = 0) -> dict:
    spec = dataclasses.replace(scenario.game, horizon=min(scenario.game.horizon, GRADIENT_HORIZON))
    grid = TimeGrid(spec.horizon, GRADIENT_STEPS)
    w = _interior_controls(spec, grid, np.random.default_rng(seed))
    ratios = {m: lipschitz_probe(spec, w, magnitude=m, grid=grid, seed=seed) for m in (1e-2, 1e-3)}
    a, b = ratios[1e-2], ratios[1e-3]
    spread = abs(a - b) / max(a, b) if max(a, b) > 0 else 0.0
    return {"ratios": {f"{m:g}": r for m, r in ratios.items()}, "relative_spread": spread,
            "passed": bool(np.isfinite(a) and np.isfinite(b) and spread < 0.5)}


def integrator_check(scenario, seed: int = 0) -> dict | None:
    if scenario.game.dim != 1:
        return None
    spec = dataclasses.replace(scenario.game, horizon=min(scenario.game.horizon, GRADIENT_HORIZON))
    grid = TimeGrid(spec.horizon, 50)
    w = _interior_controls(spec, grid, np.random.default_rng(seed))
    main = eval_costs(spec, w, integrate_forward(spec, w, grid), grid)
    ref = reference_costs(spec, w, grid)
    err = float(max(rel_error(a, b) for a, b in zip(main, ref)))
    return {"max_rel_cost_gap": err, "passed": err <= 1e-3}


def brute_force_check(scenario, pieces: int = 3, levels: int = 21) -> dict | None:
    spec = scenario.game
    if scenario.mode != "nash" or spec.n_agents != 2 or spec.dim != 1:
        return None
    spec = dataclasses.replace(spec, horizon=BRUTE_FORCE_HORIZON)
    try:
        bf = brute_force_equilibrium(spec, pieces, levels)
    except CycleDetected as e:
        return {"cycle": str(e), "passed": None}
    grid = TimeGrid(spec.horizon, 60)
    try:
        sol = solve_fixed_point(spec, SolverConfig(n_steps=60), grid)
    except NonConvergence as e:
        return {"solver": str(e), "passed": None}
    gap = float(np.max(np.abs(piece_averages(sol.controls, grid, pieces) - bf.levels)))
    cell = float(np.max(spec.box_hi - spec.box_lo)) / levels
    return {"max_gap": gap, "cell": cell, "rounds": bf.rounds, "passed": gap <= cell}


def verify_scenario(scenario, seed: int = 0) -> dict:
    """Run every applicable oracle; entries that do not apply are ``None``."""
    out = {
        "scenario": scenario.name,
        "seed": seed,
        "gradient": gradient_check(scenario, seed),
        "stability": stability_check(scenario, seed),
        "integrator": integrator_check(scenario, seed),
        "brute_force": brute_force_check(scenario),
    }
    flags = [v["passed"] for v in out.values() if isinstance(v, dict) and v.get("passed") is not None]
    out["passed"] = all(flags)
    return out
