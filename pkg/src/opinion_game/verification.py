"""Independent oracles for the solver stack.

The reference integrators, the reference map step and the brute-force search
never touch the RK4 integrator, the costate solvers or the Simpson quadrature
of the main code path: they run explicit Euler or Heun schemes on refined
grids with a locally re-derived one-dimensional kernel, so a bug in the main
path cannot cancel out. The finite-difference and Lipschitz probes do reuse
the forward model, since they check the adjoint and the stability estimate.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .dynamics import default_grid, eval_costs, integrate_forward
from .model import GameSpec, ParetoWeights, TimeGrid, ValidationError

log = logging.getLogger(__name__)


class CycleDetected(RuntimeError):
    """Discrete best-response iteration revisited an earlier profile."""

    def __init__(self, message: str, history: list):
        super().__init__(message)
        self.history = history


# one-dimensional bump kernel, written out independently of ``model``

def _bump(alpha: float, radius: float, z: np.ndarray) -> np.ndarray:
    r2 = radius * radius
    inside = np.abs(z) < radius
    g = np.where(inside, z * z - r2, -1.0)
    return np.where(inside, np.exp(alpha / r2 + alpha / g), 0.0)


def _kernel_1d(spec: GameSpec, z):
    return _bump(spec.kernel.alpha, spec.kernel.radius, z) * z


def _kernel_slope_1d(spec: GameSpec, z):
    alpha, radius = spec.kernel.alpha, spec.kernel.radius
    a = _bump(alpha, radius, z)
    g = np.where(np.abs(z) < radius, z * z - radius * radius, -1.0)
    return a - 2.0 * alpha * z * z * a / (g * g)


def _require_scalar(spec: GameSpec):
    if spec.dim != 1:
        raise ValidationError("this oracle handles one-dimensional judgments only")


def _refine_linear(profile: np.ndarray, refine: int) -> np.ndarray:
    """Linear interpolation of a node profile onto a grid ``refine`` times finer."""
    n = profile.shape[0] - 1
    s = np.arange(n * refine + 1) / refine
    k = np.minimum(s.astype(int), n - 1)
    frac = (s - k)[:, None, None]
    return (1.0 - frac) * profile[k] + frac * profile[k + 1]


def reference_states(spec: GameSpec, controls: np.ndarray, grid: TimeGrid, refine: int = 100) -> np.ndarray:
    """Heun's method on a ``refine`` times finer grid; returns states on the fine grid (d = 1)."""
    _require_scalar(spec)
    w = _refine_linear(np.asarray(controls, dtype=float), refine)[..., 0]
    h = grid.step / refine
    x = np.empty_like(w)
    x[0] = spec.initial_judgments[:, 0]

    def f(xk, wk):
        return _kernel_1d(spec, wk[None, :] - xk[:, None]).sum(axis=1)

    for k in range(w.shape[0] - 1):
        k1 = f(x[k], w[k])
        k2 = f(x[k] + h * k1, w[k + 1])
        x[k + 1] = x[k] + 0.5 * h * (k1 + k2)
    return x[..., None]


def reference_costs(spec: GameSpec, controls: np.ndarray, grid: TimeGrid, refine: int = 100) -> np.ndarray:
    """All agents' costs from Heun states and the trapezoidal rule on the refined grid (d = 1)."""
    _require_scalar(spec)
    w = _refine_linear(np.asarray(controls, dtype=float), refine)[..., 0]
    x = reference_states(spec, controls, grid, refine)[..., 0]
    wbar = w.mean(axis=1, keepdims=True)
    xbar = x.mean(axis=1, keepdims=True)
    lam = spec.lam.value(xbar)
    f = (0.5 * (1 - spec.delta) * (w - x) ** 2 + 0.5 * spec.delta * (wbar - x) ** 2
         + spec.zeta * lam[:, None])
    h = grid.step / refine
    return h * (0.5 * f[0] + f[1:-1].sum(axis=0) + 0.5 * f[-1])


def reference_phi_step(spec: GameSpec, controls: np.ndarray, grid: TimeGrid, refine: int = 100) -> np.ndarray:
    """One application of the projected Nash map by explicit Euler (d = 1).

    Forward Euler for the states and backward Euler sweeps for the costates on
    a refined grid, sampled back at the coarse nodes.
    """
    _require_scalar(spec)
    n = spec.n_agents
    w = _refine_linear(np.asarray(controls, dtype=float), refine)[..., 0]
    h = grid.step / refine
    steps = w.shape[0] - 1
    x = np.empty_like(w)
    x[0] = spec.initial_judgments[:, 0]
    for k in range(steps):
        x[k + 1] = x[k] + h * _kernel_1d(spec, w[k][None, :] - x[k][:, None]).sum(axis=1)
    wbar = w.mean(axis=1)
    xbar = x.mean(axis=1)
    lam_slope = spec.lam.gradient(xbar[:, None])[:, 0]
    # phi[k, j, i]; -phi' = -A_j phi_ji + 1{i=j}(x_i - delta_i wbar - (1-delta_i) w_i) + zeta_i/N lam'
    phi = np.zeros((steps + 1, n, n))
    eye = np.eye(n)
    for k in range(steps, 0, -1):
        A = _kernel_slope_1d(spec, w[k][None, :] - x[k][:, None]).sum(axis=1)
        own = x[k] - spec.delta * wbar[k] - (1 - spec.delta) * w[k]
        g = eye * own[None, :] + (spec.zeta / n)[None, :] * lam_slope[k]
        phi[k - 1] = phi[k] - h * (A[:, None] * phi[k] - g)
    D = _kernel_slope_1d(spec, w[:, :, None] - x[:, None, :])  # D[k, i, j] = K'(w_i - x_j)
    adj = np.einsum("kij,kji->ki", D, phi)
    scale = 1.0 / (1.0 - spec.delta)
    out = x - spec.delta * scale / n * (wbar[:, None] - x) - scale * adj
    out = np.clip(out, spec.box_lo[:, 0], spec.box_hi[:, 0])
    return out[::refine, :, None]


def clip_direction(spec: GameSpec, controls: np.ndarray, direction: np.ndarray, step: float):
    """Zero the entries of a full-profile direction that would leave the boxes; returns (v, count)."""
    v = np.array(direction, dtype=float)
    bad = (controls + step * v > spec.box_hi) | (controls + step * v < spec.box_lo)
    bad |= (controls - step * v > spec.box_hi) | (controls - step * v < spec.box_lo)
    v[bad] = 0.0
    return v, int(bad.sum())


def fd_gateaux(spec: GameSpec, i: int | None, controls: np.ndarray, direction: np.ndarray,
               step: float = 1e-5, grid: TimeGrid | None = None,
               weights: ParetoWeights | None = None) -> float:
    """Central difference of ``J_i`` (or of ``sum theta_k J_k`` with ``weights``) along ``direction``.

    ``direction`` has shape ``(n_nodes, d)`` for agent ``i`` or is a full
    profile. Entries that would leave the box are clipped with a warning.
    """
    if step <= 0:
        raise ValidationError("finite-difference step must be positive")
    controls = np.asarray(controls, dtype=float)
    grid = grid or default_grid(spec, controls)
    direction = np.asarray(direction, dtype=float)
    if direction.ndim == 2:
        if i is None:
            raise ValidationError("a single-agent direction needs an agent index")
        full = np.zeros_like(controls)
        full[:, i] = direction
        direction = full
    v, clipped = clip_direction(spec, controls, direction, step)
    if clipped:
        log.warning("clipped %d direction entries at the box boundary", clipped)

    def objective(w):
        costs = eval_costs(spec, w, integrate_forward(spec, w, grid), grid)
        return float(costs @ weights.theta) if weights is not None else float(costs[i])

    return (objective(controls + step * v) - objective(controls - step * v)) / (2.0 * step)


@dataclass
class BruteForceResult:
    """Discrete equilibrium: ``levels[i, p]`` is agent ``i``'s value on piece ``p``."""

    levels: np.ndarray
    grid_levels: np.ndarray
    rounds: int
    cell: float

    def piecewise_profile(self, grid: TimeGrid) -> np.ndarray:
        pieces = self.levels.shape[1]
        idx = np.minimum((grid.nodes / grid.horizon * pieces).astype(int), pieces - 1)
        return self.levels[:, idx].T[..., None]


def _euler_costs(spec: GameSpec, profiles: np.ndarray, substeps: int) -> np.ndarray:
    """Costs of many piecewise-constant profiles at once.

    ``profiles`` has shape ``(batch, N, pieces)``; returns ``(batch, N)``.
    Forward Euler with left-point cost accumulation.
    """
    batch, n, pieces = profiles.shape
    h = spec.horizon / (pieces * substeps)
    x = np.broadcast_to(spec.initial_judgments[:, 0], (batch, n)).copy()
    cost = np.zeros((batch, n))
    for p in range(pieces):
        w = profiles[:, :, p]
        wbar = w.mean(axis=1, keepdims=True)
        for _ in range(substeps):
            lam = spec.lam.value(x.mean(axis=1, keepdims=True))
            cost += h * (0.5 * (1 - spec.delta) * (w - x) ** 2 + 0.5 * spec.delta * (wbar - x) ** 2
                         + spec.zeta * lam[:, None])
            x = x + h * _kernel_1d(spec, w[:, None, :] - x[:, :, None]).sum(axis=2)
    return cost


def brute_force_equilibrium(spec: GameSpec, pieces: int = 3, levels: int = 21, substeps: int = 100,
                            max_rounds: int = 50) -> BruteForceResult:
    """Iterated exact best response over piecewise-constant controls on a level grid.

    Each agent picks ``pieces`` values from ``levels`` equispaced points of its
    box; a best response is an exhaustive search over all ``levels ** pieces``
    candidates. Iteration stops when no agent changes, and raises
    :class:`CycleDetected` if a profile repeats first.
    """
    _require_scalar(spec)
    if spec.n_agents != 2:
        raise ValidationError("the brute-force oracle is limited to N = 2")
    if levels ** pieces > 10_000:
        raise ValidationError("search space exceeds 10^4 candidates per agent")
    n = spec.n_agents
    grids = np.linspace(spec.box_lo[:, 0], spec.box_hi[:, 0], levels).T  # (N, levels)
    cand_idx = np.array(list(itertools.product(range(levels), repeat=pieces)))
    current = np.array([[np.argmin(np.abs(grids[i] - spec.initial_judgments[i, 0]))] * pieces
                        for i in range(n)])
    seen = {current.tobytes(): 0}
    history = [current.copy()]
    for rnd in range(1, max_rounds + 1):
        changed = False
        for i in range(n):
            profiles = np.empty((len(cand_idx), n, pieces))
            for j in range(n):
                profiles[:, j] = grids[j][current[j]] if j != i else grids[i][cand_idx]
            costs = _euler_costs(spec, profiles, substeps)[:, i]
            best = cand_idx[np.argmin(costs)]
            now = costs[np.flatnonzero((cand_idx == current[i]).all(axis=1))[0]]
            if costs.min() < now - 1e-14 and not np.array_equal(best, current[i]):
                current[i] = best
                changed = True
        history.append(current.copy())
        if not changed:
            vals = np.take_along_axis(grids, current, axis=1)
            return BruteForceResult(vals, grids, rnd, float(grids[0, 1] - grids[0, 0]))
        key = current.tobytes()
        if key in seen:
            raise CycleDetected(f"best responses cycle with period {rnd - seen[key]}", history)
        seen[key] = rnd
    raise CycleDetected(f"no discrete equilibrium within {max_rounds} rounds", history)


def piece_averages(profile: np.ndarray, grid: TimeGrid, pieces: int) -> np.ndarray:
    """Time averages of a node profile over ``pieces`` equal sub-intervals, shape ``(N, pieces)`` (d = 1)."""
    fine = _refine_linear(np.asarray(profile, dtype=float), 50)[..., 0]
    t = np.linspace(0.0, grid.horizon, fine.shape[0])
    out = np.empty((profile.shape[1], pieces))
    for p in range(pieces):
        a, b = p * grid.horizon / pieces, (p + 1) * grid.horizon / pieces
        m = (t >= a - 1e-12) & (t <= b + 1e-12)
        out[:, p] = np.trapezoid(fine[m], t[m], axis=0) / (b - a)
    return out


def lipschitz_probe(spec: GameSpec, controls: np.ndarray, n_pairs: int = 20, magnitude: float = 1e-2,
                    grid: TimeGrid | None = None, seed: int | np.random.Generator | None = 0,
                    agents=None) -> float:
    """Largest observed ``|x - x'|_inf / sum_j |w_j - w'_j|_{L1}`` over random perturbations.

    Perturbations are random smooth paths of sup norm ``magnitude`` on the
    chosen ``agents`` (all by default), projected into the boxes. Pairs whose
    projected perturbation vanishes are skipped.
    """
    controls = np.asarray(controls, dtype=float)
    grid = grid or default_grid(spec, controls)
    rng = np.random.default_rng(seed)
    agents = range(spec.n_agents) if agents is None else agents
    base = integrate_forward(spec, controls, grid)
    s = grid.nodes / grid.horizon
    best = 0.0
    for _ in range(n_pairs):
        trial = controls.copy()
        for i in agents:
            coef = rng.normal(size=(4, spec.dim))
            path = np.cos(np.pi * np.arange(4)[None, :] * s[:, None]) @ coef
            trial[:, i] += magnitude * path / np.max(np.abs(path))
        trial = spec.project(trial)
        diff = np.linalg.norm(trial - controls, axis=-1)  # (n_nodes, N)
        l1 = float(np.sum(grid.step * 0.5 * (diff[:-1] + diff[1:])))
        if l1 == 0.0:
            continue
        gap = float(np.max(np.abs(integrate_forward(spec, trial, grid) - base)))
        best = max(best, gap / l1)
    return best


def fine_grid_error(spec: GameSpec, controls_fn, horizon_steps: int, refine: int = 100) -> float:
    """Sup gap at shared nodes between RK4 on ``horizon_steps`` and on a grid ``refine`` times finer.

    ``controls_fn(t)`` returns the profile ``(N, d)`` at time ``t``.
    """
    coarse = TimeGrid(spec.horizon, horizon_steps)
    fine = TimeGrid(spec.horizon, horizon_steps * refine)
    wc = np.array([controls_fn(t) for t in coarse.nodes])
    wf = np.array([controls_fn(t) for t in fine.nodes])
    xc = integrate_forward(spec, wc, coarse)
    xf = integrate_forward(spec, wf, fine)[::refine]
    return float(np.max(np.abs(xc - xf)))


def rel_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


__all__ = ["CycleDetected", "BruteForceResult", "brute_force_equilibrium", "clip_direction", "fd_gateaux",
           "fine_grid_error", "lipschitz_probe", "piece_averages", "reference_costs", "reference_phi_step",
           "reference_states", "rel_error"]

