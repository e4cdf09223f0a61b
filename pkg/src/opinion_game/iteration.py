"""Picard iteration and time continuation shared by the Nash and Pareto solvers."""
from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .dynamics import integrate_forward
from .model import GameSpec, TimeGrid, ValidationError

log = logging.getLogger(__name__)

MAX_SEGMENT_LENGTH = 0.25
MIN_GRID_STEPS = 200
UPDATE_RULES = ("projection", "pointwise")


class NonConvergence(RuntimeError):
    """Picard iteration did not reach the tolerance.

    ``segment`` is the failing continuation segment, when there is one.
    """

    def __init__(self, message: str, report: "SolveReport", segment: int | None = None):
        super().__init__(message)
        self.report = report
        self.segment = segment


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the fixed-point and continuation solvers.

    ``segments``/``n_steps`` left as ``None`` are picked by :func:`resolve_layout`.
    ``staggered`` computes the costate from the previous state iterate, as in the
    original iteration; ``False`` uses the state of the current controls.
    ``refinements`` bounds how often continuation may halve a failing segment.
    ``update`` selects the map: ``"projection"`` is the projected stationarity
    map, ``"pointwise"`` minimizes each agent's Hamiltonian per node instead
    (see :mod:`opinion_game.pointwise`).
    """

    tolerance: float = 1e-8
    max_iterations: int = 500
    damping: float = 1.0
    segments: int | None = None
    n_steps: int | None = None
    staggered: bool = True
    update: str = "projection"
    refinements: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be positive")
        if not 0 < self.damping <= 1:
            raise ValidationError("damping must lie in (0, 1]")
        if self.segments is not None and self.segments < 1:
            raise ValidationError("segments must be positive")
        if self.n_steps is not None and self.n_steps < 1:
            raise ValidationError("n_steps must be positive")
        if self.refinements < 0:
            raise ValidationError("refinements must be non-negative")
        if self.update not in UPDATE_RULES:
            raise ValidationError(f"unknown update rule {self.update!r}; expected one of {UPDATE_RULES}")

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class SolveReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    converged: bool = False
    segment_count: int = 1
    wall_time: float = 0.0
    segment_iterations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else math.nan

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["final_residual"] = self.final_residual
        return d


class Solution(NamedTuple):
    controls: np.ndarray
    states: np.ndarray
    report: SolveReport


# (spec, controls, states, adjoint_states, grid) -> updated controls
MapFn = Callable[[GameSpec, np.ndarray, np.ndarray, np.ndarray, TimeGrid], np.ndarray]


def resolve_layout(horizon: float, config: SolverConfig) -> tuple[int, TimeGrid]:
    """Segment count and full-horizon grid; every segment gets the same number of steps."""
    m = config.segments or max(1, math.ceil(horizon / MAX_SEGMENT_LENGTH - 1e-9))
    if config.n_steps is not None:
        if config.n_steps % m:
            raise ValidationError(f"{config.n_steps} grid steps do not split into {m} segments")
        return m, TimeGrid(horizon, config.n_steps)
    per_segment = max(8, math.ceil(MIN_GRID_STEPS / m))
    return m, TimeGrid(horizon, m * per_segment)


def picard(spec: GameSpec, grid: TimeGrid, config: SolverConfig, update: MapFn,
           initial: np.ndarray | None = None) -> Solution:
    """Iterate ``w <- (1 - rho) w + rho F[w]`` until the control plus state change drops below tolerance."""
    t0 = time.perf_counter()
    if initial is None:
        w = np.broadcast_to(spec.project(spec.initial_judgments), (grid.n_nodes, spec.n_agents, spec.dim)).copy()
    else:
        w = spec.project(np.array(initial, dtype=float))
    x_prev = integrate_forward(spec, w, grid)
    report = SolveReport()
    rho = config.damping
    for it in range(1, config.max_iterations + 1):
        x = integrate_forward(spec, w, grid)
        target = update(spec, w, x, x_prev if config.staggered else x, grid)
        w_new = target if rho == 1.0 else (1.0 - rho) * w + rho * target
        res = float(np.max(np.abs(w_new - w)) + np.max(np.abs(x - x_prev)))
        report.residual_history.append(res)
        report.iterations = it
        w, x_prev = w_new, x
        if not math.isfinite(res):
            break
        if res < config.tolerance:
            report.converged = True
            break
    report.segment_iterations = [report.iterations]
    report.wall_time = time.perf_counter() - t0
    if not report.converged:
        raise NonConvergence(
            f"Picard iteration stopped after {report.iterations} iterations with residual "
            f"{report.final_residual:.3e} (tolerance {config.tolerance:.1e})", report)
    return Solution(w, integrate_forward(spec, w, grid), report)


def polygon(knots: np.ndarray, knot_nodes, grid: TimeGrid) -> np.ndarray:
    """Piecewise-linear profile through ``knots`` placed at grid node indices ``knot_nodes``."""
    out = np.empty((grid.n_nodes,) + knots.shape[1:])
    for (a, b), ka, kb in zip(zip(knot_nodes[:-1], knot_nodes[1:]), knots[:-1], knots[1:]):
        s = (np.arange(a, b) - a) / (b - a)
        out[a:b] = ka + s[:, None, None] * (kb - ka)
    out[knot_nodes[-1]] = knots[-1]
    return out


def continuation(spec: GameSpec, config: SolverConfig, solve_segment: Callable[[GameSpec, TimeGrid], Solution],
                 grid: TimeGrid | None = None) -> Solution:
    """Chain short-horizon solves and join their boundary controls by a polygon.

    Segment ``k`` starts from the terminal state of segment ``k - 1``. The knot
    at ``T`` is the initial control of one further segment started at ``T``, so
    every knot is the starting value of a segment solution. With a single
    segment the fixed-point solution is returned unchanged.

    A segment whose iteration fails is split in half, at most
    ``config.refinements`` times, keeping the grid step. The extra knots land on
    grid nodes of the full horizon.
    """
    t0 = time.perf_counter()
    if grid is None:
        m, grid = resolve_layout(spec.horizon, config)
    else:
        m = config.segments or resolve_layout(spec.horizon, config.replace(n_steps=grid.n_steps))[0]
    if grid.n_steps % m:
        raise ValidationError(f"{grid.n_steps} grid steps do not split into {m} segments")
    if m == 1:
        return solve_segment(spec, grid)

    h = grid.step
    per = grid.n_steps // m
    report = SolveReport(segment_count=m)
    knots, knot_nodes = [], []
    x_start = spec.initial_judgments

    def attempt(steps: int, depth: int, label: str) -> Solution:
        seg_grid = TimeGrid(steps * h, steps)
        seg_spec = dataclasses.replace(spec, horizon=seg_grid.horizon, initial_judgments=x_start)
        try:
            return solve_segment(seg_spec, seg_grid)
        except NonConvergence as exc:
            report.iterations += exc.report.iterations
            report.residual_history += exc.report.residual_history
            if depth < config.refinements and steps % 2 == 0:
                report.notes.append(f"segment {label} split after {exc.report.iterations} iterations")
                return None
            report.wall_time = time.perf_counter() - t0
            raise NonConvergence(f"segment {label} of {m}: {exc}", report, segment=int(label.split('.')[0])) from exc

    for k in range(m + 1):
        # pending pieces of segment k as (start node, steps, depth)
        stack = [(k * per, per, 0)]
        while stack:
            node, steps, depth = stack.pop()
            sol = attempt(steps, depth, f"{k}" if depth == 0 else f"{k}.{node}")
            if sol is None:
                half = steps // 2
                stack += [(node + half, half, depth + 1), (node, half, depth + 1)]
                continue
            report.iterations += sol.report.iterations
            report.residual_history += sol.report.residual_history
            report.segment_iterations.append(sol.report.iterations)
            knots.append(sol.controls[0])
            knot_nodes.append(node)
            x_start = sol.states[-1]
            if k == m:
                break
        log.debug("segment %d/%d done", k, m)
    controls = polygon(np.array(knots), knot_nodes, grid)
    report.converged = True
    report.wall_time = time.perf_counter() - t0
    return Solution(controls, integrate_forward(spec, controls, grid), report)
