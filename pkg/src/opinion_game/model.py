"""Domain types, parameter validation and the bump interaction kernel.

Array conventions used throughout the package:

* control profiles and state trajectories are arrays of shape
  ``(n_nodes, n_agents, dim)``, indexed ``[k, i, :]`` for agent ``i`` at
  grid node ``t_k``;
* Nash adjoints have shape ``(n_nodes, n_agents, n_agents, dim)`` indexed
  ``[k, j, i, :]`` (row agent ``j``, target agent ``i``);
* Pareto adjoints have shape ``(n_nodes, n_agents, dim)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline


class ValidationError(ValueError):
    """A game or scenario parameter violates one of the model invariants."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class KernelSpec:
    """Bump kernel ``a(z) = c exp(alpha / (|z|^2 - R^2))`` on ``|z| < R``."""

    alpha: float = 0.1
    radius: float = 0.5

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValidationError(f"kernel alpha must be positive, got {self.alpha}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValidationError(f"kernel radius must be positive, got {self.radius}")

    @property
    def normalization(self) -> float:
        # makes a(0) == 1
        return math.exp(self.alpha / self.radius**2)


LAMBDA_VARIANTS = ("affine-decreasing", "constant", "custom-tabulated")


@dataclass(frozen=True)
class LambdaSpec:
    """Exogenous intensity ``lambda(xbar)`` of the average true judgment.

    ``affine-decreasing`` is ``lambda0 + lambda1 * (1 - xbar)`` (one-dimensional
    judgments only). ``custom-tabulated`` interpolates ``(table_x, table_y)``
    with a cubic spline, also one-dimensional.
    """

    variant: str = "constant"
    lambda0: float = 0.0
    lambda1: float = 0.0
    table_x: tuple = ()
    table_y: tuple = ()
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.variant not in LAMBDA_VARIANTS:
            raise ValidationError(
                f"unknown lambda variant {self.variant!r}; expected one of {LAMBDA_VARIANTS}"
            )
        if self.lambda0 < 0 or self.lambda1 < 0:
            raise ValidationError("lambda0 and lambda1 must be non-negative")
        if self.variant == "custom-tabulated":
            tx, ty = tuple(map(float, self.table_x)), tuple(map(float, self.table_y))
            if len(tx) < 2 or len(tx) != len(ty):
                raise ValidationError("tabulated lambda needs matching tables of length >= 2")
            if np.any(np.diff(tx) <= 0):
                raise ValidationError("tabulated lambda abscissae must be strictly increasing")
            object.__setattr__(self, "table_x", tx)
            object.__setattr__(self, "table_y", ty)
            object.__setattr__(self, "_spline", CubicSpline(tx, ty))

    @property
    def needs_scalar_state(self) -> bool:
        return self.variant != "constant"

    def value(self, xbar: np.ndarray) -> np.ndarray:
        """Intensity at average states ``xbar`` of shape ``(..., dim)``."""
        xbar = np.asarray(xbar, dtype=float)
        if self.variant == "constant":
            return np.full(xbar.shape[:-1], self.lambda0)
        s = xbar[..., 0]
        if self.variant == "affine-decreasing":
            return self.lambda0 + self.lambda1 * (1.0 - s)
        return self._spline(s)

    def gradient(self, xbar: np.ndarray) -> np.ndarray:
        """Gradient of the intensity, same shape as ``xbar``. Independent of lambda0."""
        xbar = np.asarray(xbar, dtype=float)
        if self.variant == "constant":
            return np.zeros_like(xbar)
        if self.variant == "affine-decreasing":
            return np.full_like(xbar, -self.lambda1)
        return self._spline(xbar[..., 0], 1)[..., None]


@dataclass(frozen=True)
class GameSpec:
    """Population and parameter description of one game instance.

    ``box_lo``/``box_hi`` hold the per-agent action boxes, shape ``(N, d)``.
    """

    initial_judgments: np.ndarray
    delta: np.ndarray
    zeta: np.ndarray
    box_lo: np.ndarray
    box_hi: np.ndarray
    horizon: float
    kernel: KernelSpec = KernelSpec()
    lam: LambdaSpec = LambdaSpec()

    def __post_init__(self):
        x0 = np.array(self.initial_judgments, dtype=float)
        if x0.ndim == 1:
            x0 = x0[:, None]
        if x0.ndim != 2:
            raise ValidationError("initial_judgments must have shape (N, d)")
        n, d = x0.shape
        if n < 2:
            raise ValidationError(f"the game needs N > 1 agents, got {n}")
        if d < 1:
            raise ValidationError("dimension must be at least 1")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValidationError(f"horizon must be positive, got {self.horizon}")

        delta = np.broadcast_to(np.asarray(self.delta, dtype=float), (n,)).copy()
        zeta = np.broadcast_to(np.asarray(self.zeta, dtype=float), (n,)).copy()
        if not np.all(delta < 1):
            bad = np.flatnonzero(~(delta < 1)).tolist()
            raise ValidationError(f"delta must be < 1 for every agent (violated by agents {bad})")
        if not np.all(zeta >= 0):
            raise ValidationError("zeta must be non-negative")

        lo = np.broadcast_to(np.asarray(self.box_lo, dtype=float), (n, d)).copy()
        hi = np.broadcast_to(np.asarray(self.box_hi, dtype=float), (n, d)).copy()
        if not np.all(np.isfinite(lo) & np.isfinite(hi)):
            raise ValidationError("action boxes must be bounded")
        if np.any(lo > hi):
            raise ValidationError("every action box must be nonempty (lo <= hi)")
        bound = float(np.max(np.maximum(np.abs(lo), np.abs(hi))))
        if np.any(np.abs(x0) > bound + 1e-12):
            raise ValidationError(
                f"initial judgments must satisfy |x0|_inf <= R = {bound} (box bound)"
            )
        if self.lam.needs_scalar_state and d != 1:
            raise ValidationError(f"lambda variant {self.lam.variant!r} requires dim == 1")

        for name, val in (("initial_judgments", x0), ("delta", delta), ("zeta", zeta),
                          ("box_lo", lo), ("box_hi", hi)):
            object.__setattr__(self, name, _frozen(val))
        object.__setattr__(self, "horizon", float(self.horizon))

    @classmethod
    def build(cls, x0, delta, zeta=0.0, box=(-1.0, 1.0), horizon=1.0,
              kernel: KernelSpec | None = None, lam: LambdaSpec | None = None) -> "GameSpec":
        """Convenience constructor with one box ``(lo, hi)`` shared by every agent."""
        return cls(initial_judgments=x0, delta=delta, zeta=zeta, box_lo=box[0], box_hi=box[1],
                   horizon=horizon, kernel=kernel or KernelSpec(), lam=lam or LambdaSpec())

    @property
    def n_agents(self) -> int:
        return self.initial_judgments.shape[0]

    @property
    def dim(self) -> int:
        return self.initial_judgments.shape[1]

    @property
    def box_bound(self) -> float:
        """Smallest R with every action box inside ``[-R, R]^d``."""
        return float(np.max(np.maximum(np.abs(self.box_lo), np.abs(self.box_hi))))

    def project(self, controls: np.ndarray) -> np.ndarray:
        """Clamp a profile of shape ``(..., N, d)`` into the agents' boxes."""
        return project_box(self.box_lo, self.box_hi, controls)

    def is_admissible(self, controls: np.ndarray, atol: float = 0.0) -> bool:
        return bool(np.all(controls >= self.box_lo - atol) and np.all(controls <= self.box_hi + atol))


@dataclass(frozen=True)
class TimeGrid:
    horizon: float
    n_steps: int

    def __post_init__(self):
        if not (self.horizon > 0):
            raise ValidationError("grid horizon must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValidationError("grid needs a positive integer number of steps")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def step(self) -> float:
        return self.horizon / self.n_steps

    @property
    def n_nodes(self) -> int:
        return self.n_steps + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


@dataclass(frozen=True)
class ParetoWeights:
    """Strictly positive influence weights, normalized to sum to one.

    Already-normalized input is kept bit-for-bit, so normalizing twice is a no-op.
    """

    theta: np.ndarray

    def __post_init__(self):
        th = np.array(self.theta, dtype=float).ravel()
        if th.size == 0 or not np.all(np.isfinite(th)):
            raise ValidationError("weights must be finite and nonempty")
        if not np.all(th > 0):
            raise ValidationError("Pareto weights must be strictly positive")
        total = th.sum()
        if abs(total - 1.0) > 1e-12:
            th = th / total
        object.__setattr__(self, "theta", _frozen(th))

    def __len__(self) -> int:
        return self.theta.size


def eval_a(kernel: KernelSpec, z: np.ndarray) -> np.ndarray:
    """Bump amplitude ``a(z)`` for ``z`` of shape ``(..., d)``; values in [0, 1]."""
    z = np.asarray(z, dtype=float)
    r2 = np.sum(z * z, axis=-1)
    gap = r2 - kernel.radius**2
    inside = gap < 0
    safe = np.where(inside, gap, -1.0)
    return np.where(inside, kernel.normalization * np.exp(kernel.alpha / safe), 0.0)


def eval_K(kernel: KernelSpec, z: np.ndarray) -> np.ndarray:
    """Interaction ``K(z) = a(z) z``."""
    z = np.asarray(z, dtype=float)
    return eval_a(kernel, z)[..., None] * z


def jacobian_K(kernel: KernelSpec, z: np.ndarray) -> np.ndarray:
    """Jacobian ``DK(z) = a(z) I + z grad_a(z)^T``, shape ``(..., d, d)``.

    Zero on and outside the support sphere, where all derivatives of the bump vanish.
    """
    z = np.asarray(z, dtype=float)
    d = z.shape[-1]
    r2 = np.sum(z * z, axis=-1)
    gap = r2 - kernel.radius**2
    inside = gap < 0
    safe = np.where(inside, gap, -1.0)
    a = np.where(inside, kernel.normalization * np.exp(kernel.alpha / safe), 0.0)
    # grad a = -2 alpha a z / gap^2
    coef = np.where(inside, -2.0 * kernel.alpha * a / (safe * safe), 0.0)
    jac = coef[..., None, None] * (z[..., :, None] * z[..., None, :])
    jac += a[..., None, None] * np.eye(d)
    return jac


def project_box(lo, hi, v) -> np.ndarray:
    """Componentwise clamp of ``v`` into ``[lo, hi]`` (Euclidean projection onto a box)."""
    return np.minimum(np.maximum(v, lo), hi)


def as_profile(values: Sequence, n_nodes: int, spec: GameSpec) -> np.ndarray:
    """Broadcast per-agent constants to a full ``(n_nodes, N, d)`` profile."""
    v = np.asarray(values, dtype=float).reshape(spec.n_agents, spec.dim)
    return np.broadcast_to(v, (n_nodes, spec.n_agents, spec.dim)).copy()
