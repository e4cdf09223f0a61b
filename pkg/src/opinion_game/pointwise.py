"""Pointwise Hamiltonian minimization, an alternative to the projected fixed-point maps.

With the state and costates frozen, the projected maps are stationarity
conditions of a per-node Hamiltonian in the agent's own control. When the
costates are large the Hamiltonian is not convex and iterating the projection
can cycle between its critical points. The update here picks the global box
minimizer instead: a dense scan locates the best basin and bisection on the
derivative polishes the interior minimizer. One-dimensional judgments only.

In every case the Hamiltonian of agent ``i`` in its control ``v`` has the form
``A_i v^2 / 2 - B_i v + sum_j c_ij K(v - x_j)`` up to a constant.
"""
from __future__ import annotations

import numpy as np

from .model import GameSpec, KernelSpec, ValidationError, eval_K, jacobian_K

SCAN_LEVELS = 201
BISECTIONS = 60


def _require_scalar(spec: GameSpec):
    if spec.dim != 1:
        raise ValidationError("the pointwise update is implemented for dim == 1 only")


def _objective(kernel: KernelSpec, v, A, B, C, xs):
    # v: (k, i, m); A, B: (k, i); C: (k, i, j); xs: (k, j)
    z = v[:, :, None, :] - xs[:, None, :, None]
    coupling = np.einsum("kijm,kij->kim", eval_K(kernel, z[..., None])[..., 0], C)
    return 0.5 * A[..., None] * v * v - B[..., None] * v + coupling


def _slope(kernel: KernelSpec, v, A, B, C, xs):
    # v: (k, i)
    z = v[:, :, None] - xs[:, None, :]
    dk = jacobian_K(kernel, z[..., None])[..., 0, 0]
    return A * v - B + np.einsum("kij,kij->ki", dk, C)


def minimize(kernel: KernelSpec, lo, hi, A, B, C, xs, levels: int = SCAN_LEVELS) -> np.ndarray:
    """Box minimizer of every agent's Hamiltonian at every node, shape ``(k, i)``."""
    k, n = A.shape
    grid = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, levels)
    cand = np.broadcast_to(grid, (k, n, levels))
    vals = _objective(kernel, cand, A, B, C, xs)
    pick = np.argmin(vals, axis=-1)
    best = np.take_along_axis(cand, pick[..., None], -1)[..., 0]
    best_val = np.take_along_axis(vals, pick[..., None], -1)[..., 0]

    cell = (hi - lo) / (levels - 1)
    a = np.maximum(best - cell, lo)
    c = np.minimum(best + cell, hi)
    ga = _slope(kernel, a, A, B, C, xs)
    gc = _slope(kernel, c, A, B, C, xs)
    bracket = (ga < 0) & (gc > 0)
    left, right = a.copy(), c.copy()
    for _ in range(BISECTIONS):
        mid = 0.5 * (left + right)
        down = _slope(kernel, mid, A, B, C, xs) < 0
        left = np.where(down, mid, left)
        right = np.where(down, right, mid)
    root = 0.5 * (left + right)

    out = best
    out = np.where(~bracket & (ga >= 0) & (a == lo), lo, out)
    out = np.where(~bracket & (gc <= 0) & (c == hi), hi, out)
    out = np.where(bracket, root, out)
    # keep the scan point if polishing did not help (flat or degenerate basins)
    out_val = _objective(kernel, out[..., None], A, B, C, xs)[..., 0]
    return np.where(out_val <= best_val, out, best)


def nash_update(spec: GameSpec, controls, states, phi) -> np.ndarray:
    """Each agent's Hamiltonian minimizer, other agents' controls held at ``controls``."""
    _require_scalar(spec)
    n = spec.n_agents
    d = spec.delta
    w, xs = controls[..., 0], states[..., 0]
    others = w.sum(axis=1, keepdims=True) - w
    A = np.broadcast_to((1.0 - d) + d / n**2, w.shape)
    B = (1.0 - d) * xs + (d / n) * (xs - others / n)
    C = np.swapaxes(phi[..., 0], 1, 2)  # C[k, i, j] = phi[k, j, i]
    out = minimize(spec.kernel, spec.box_lo[:, 0], spec.box_hi[:, 0], A, B, C, xs)
    return out[..., None]


def pareto_update(spec: GameSpec, theta, controls, states, phi) -> np.ndarray:
    """Coordinate-wise minimizer of the cooperative Hamiltonian, one agent at a time."""
    _require_scalar(spec)
    n = spec.n_agents
    td = theta * spec.delta
    w, xs = controls[..., 0], states[..., 0]
    others = w.sum(axis=1, keepdims=True) - w
    own = theta * (1.0 - spec.delta)
    A = np.broadcast_to(own + td.sum() / n**2, w.shape)
    B = own * xs + ((xs @ td)[:, None] - td.sum() * others / n) / n
    C = np.broadcast_to(phi[:, None, :, 0], (w.shape[0], n, n))
    out = minimize(spec.kernel, spec.box_lo[:, 0], spec.box_hi[:, 0], A, B, C, xs)
    return out[..., None]
