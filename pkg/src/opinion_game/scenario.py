"""Scenario files, experiment execution and result bundles.

A scenario is a YAML document::

    name: fig1_left
    mode: nash                      # or pareto (then ``weights`` is required)
    game:
      initial_judgments: {equispaced: [-1, 1, 10]}   # or an explicit (nested) list
      delta: abs(x0) min 0.8        # number, list, or rule (see opinion_game.rules)
      zeta: 0
      box: [-1, 1]                  # shared box, or {lo: [...], hi: [...]} per agent
      horizon: 10
      kernel: {alpha: 0.1, radius: 0.5}
      lambda: {variant: constant, lambda0: 0, lambda1: 0}
    weights: 2*(i+1)/(N*(N+1))      # pareto only; list or rule
    solver: {segments: 200, damping: 1.0}
    diagnostics: [consensus]
    outputs: [trajectories_csv, costs_json, plot_svg]
    plot: timeseries                # or plane (d = 2)

Rules are expanded at load time; :func:`dump_scenario` writes the resolved
numbers back, so a dumped scenario reloads to the same values.
"""
from __future__ import annotations

import copy
import csv
import dataclasses
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
import yaml

from .dynamics import eval_costs, eval_intensity_integral
from .iteration import NonConvergence, SolveReport, SolverConfig, resolve_layout
from .model import GameSpec, KernelSpec, LambdaSpec, ParetoWeights, TimeGrid, ValidationError
from .nash_solver import best_response_check, check_terminal_consensus, solve_continuation
from .pareto_solver import (check_pareto_condition, check_pareto_terminal, pareto_dominance_check,
                            solve_pareto)
from .rules import RuleError, evaluate_rule

log = logging.getLogger(__name__)

MODES = ("nash", "pareto")
OUTPUTS = ("trajectories_csv", "costs_json", "plot_svg")
DIAGNOSTICS = {
    "nash": ("consensus", "best_response"),
    "pareto": ("pareto_condition", "pareto_terminal", "dominance"),
}
DEFAULT_DIAGNOSTICS = {"nash": ("consensus",), "pareto": ("pareto_condition", "pareto_terminal")}
PLOT_KINDS = ("timeseries", "plane")
AGREEMENT_TOL = 0.05

_TOP_KEYS = {"name", "mode", "description", "game", "weights", "solver", "diagnostics", "outputs", "plot"}
_GAME_KEYS = {"initial_judgments", "delta", "zeta", "box", "horizon", "kernel", "lambda"}
_SOLVER_KEYS = {f.name for f in dataclasses.fields(SolverConfig)}

AXIS_ALIASES = {
    "lambda0": "game.lambda.lambda0",
    "lambda1": "game.lambda.lambda1",
    "horizon": "game.horizon",
    "alpha": "game.kernel.alpha",
    "radius": "game.kernel.radius",
    "delta": "game.delta",
    "zeta": "game.zeta",
    "tolerance": "solver.tolerance",
    "damping": "solver.damping",
    "segments": "solver.segments",
    "n_steps": "solver.n_steps",
    "max_iterations": "solver.max_iterations",
}
# per-agent fields that also accept one shared number
_BROADCAST_FIELDS = {"game.delta", "game.zeta"}


class ParseError(ValueError):
    """Malformed scenario input; carries the offending field and its line when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None,
                 source: str | None = None):
        where = ":".join(str(p) for p in (source, line) if p is not None)
        prefix = f"{where}: " if where else ""
        about = f"field '{field}': " if field else ""
        super().__init__(f"{prefix}{about}{message}")
        self.field = field
        self.line = line
        self.source = source


@dataclass(eq=False)
class ScenarioFile:
    name: str
    mode: str
    game: GameSpec
    weights: ParetoWeights | None = None
    solver: SolverConfig = SolverConfig()
    outputs: tuple = OUTPUTS
    diagnostics: tuple = ()
    plot: str = "timeseries"
    description: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "pareto" and self.weights is None:
            raise ValidationError("pareto mode requires weights")
        if self.mode == "nash" and self.weights is not None:
            raise ValidationError("nash mode does not take weights")
        if self.weights is not None and len(self.weights) != self.game.n_agents:
            raise ValidationError(f"{len(self.weights)} weights given for {self.game.n_agents} agents")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ValidationError(f"unknown outputs {bad}; expected a subset of {OUTPUTS}")
        bad = [d for d in self.diagnostics if d not in DIAGNOSTICS[self.mode]]
        if bad:
            raise ValidationError(f"diagnostics {bad} not available in {self.mode} mode")
        if self.plot not in PLOT_KINDS:
            raise ValidationError(f"plot kind must be one of {PLOT_KINDS}")
        if self.plot == "plane" and self.game.dim != 2:
            raise ValidationError("plane plots need two-dimensional judgments")
        self.outputs = tuple(self.outputs)
        self.diagnostics = tuple(self.diagnostics)

    def to_dict(self) -> dict:
        """Canonical plain-data form with every rule expanded."""
        g = self.game
        lam = {"variant": g.lam.variant, "lambda0": float(g.lam.lambda0), "lambda1": float(g.lam.lambda1)}
        if g.lam.variant == "custom-tabulated":
            lam["table_x"] = list(g.lam.table_x)
            lam["table_y"] = list(g.lam.table_y)
        out = {
            "name": self.name,
            "mode": self.mode,
            "description": self.description,
            "game": {
                "initial_judgments": g.initial_judgments.tolist(),
                "delta": g.delta.tolist(),
                "zeta": g.zeta.tolist(),
                "box": {"lo": g.box_lo.tolist(), "hi": g.box_hi.tolist()},
                "horizon": g.horizon,
                "kernel": {"alpha": g.kernel.alpha, "radius": g.kernel.radius},
                "lambda": lam,
            },
            "weights": None if self.weights is None else self.weights.theta.tolist(),
            "solver": dataclasses.asdict(self.solver),
            "diagnostics": list(self.diagnostics),
            "outputs": list(self.outputs),
            "plot": self.plot,
        }
        return out


# ---------------------------------------------------------------- loading

def _key_lines(node, prefix="") -> dict:
    """Map dotted key paths to 1-based line numbers from a composed YAML tree."""
    lines = {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}.{k.value}" if prefix else str(k.value)
            lines[path] = k.start_mark.line + 1
            lines.update(_key_lines(v, path))
    return lines


class _Ctx:
    def __init__(self, lines: dict, source: str | None):
        self.lines, self.source = lines, source

    def error(self, path: str, message: str) -> ParseError:
        line = None
        probe = path
        while probe and line is None:
            line = self.lines.get(probe)
            probe = probe.rpartition(".")[0]
        return ParseError(message, path, line, self.source)


def _mapping(ctx: _Ctx, value, path: str, allowed: set) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ctx.error(path, f"expected a mapping, got {type(value).__name__}")
    unknown = sorted(set(map(str, value)) - allowed)
    if unknown:
        raise ctx.error(f"{path}.{unknown[0]}" if path else unknown[0],
                        f"unknown key; expected one of {sorted(allowed)}")
    return value


def _number(ctx: _Ctx, value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ctx.error(path, f"expected a number, got {value!r}")
    return float(value)


def _initial(ctx: _Ctx, value, path: str) -> np.ndarray:
    if isinstance(value, dict):
        _mapping(ctx, value, path, {"equispaced"})
        spec = value.get("equispaced")
        if not (isinstance(spec, list) and len(spec) == 3):
            raise ctx.error(f"{path}.equispaced", "expected [start, stop, count]")
        lo, hi = _number(ctx, spec[0], path), _number(ctx, spec[1], path)
        count = spec[2]
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ctx.error(f"{path}.equispaced", "count must be a positive integer")
        return np.linspace(lo, hi, count)[:, None]
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ctx.error(path, "expected a list of numbers or of coordinate lists") from None
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.size == 0:
        raise ctx.error(path, "expected shape (N,) or (N, d)")
    return arr


def _per_agent(ctx: _Ctx, value, path: str, x0: np.ndarray) -> np.ndarray:
    n = x0.shape[0]
    if isinstance(value, list):
        try:
            arr = np.array(value, dtype=float)
        except (TypeError, ValueError):
            raise ctx.error(path, "expected a list of numbers") from None
        if arr.shape != (n,):
            raise ctx.error(path, f"expected {n} values, got shape {arr.shape}")
        return arr
    try:
        return evaluate_rule(value, x0)
    except RuleError as e:
        raise ctx.error(path, str(e)) from None


def _box(ctx: _Ctx, value, path: str):
    if isinstance(value, list) and len(value) == 2 and not isinstance(value[0], list):
        return _number(ctx, value[0], path), _number(ctx, value[1], path)
    if isinstance(value, dict):
        _mapping(ctx, value, path, {"lo", "hi"})
        try:
            return np.array(value["lo"], dtype=float), np.array(value["hi"], dtype=float)
        except (KeyError, TypeError, ValueError):
            raise ctx.error(path, "per-agent boxes need numeric 'lo' and 'hi'") from None
    raise ctx.error(path, "expected [lo, hi] or {lo: ..., hi: ...}")


def _build_game(ctx: _Ctx, raw) -> GameSpec:
    g = _mapping(ctx, raw, "game", _GAME_KEYS)
    for key in ("initial_judgments", "delta", "horizon"):
        if key not in g:
            raise ctx.error(f"game.{key}", "missing required field")
    x0 = _initial(ctx, g["initial_judgments"], "game.initial_judgments")
    delta = _per_agent(ctx, g["delta"], "game.delta", x0)
    zeta = _per_agent(ctx, g.get("zeta", 0.0), "game.zeta", x0)
    lo, hi = _box(ctx, g.get("box", [-1.0, 1.0]), "game.box")
    horizon = _number(ctx, g["horizon"], "game.horizon")

    k = _mapping(ctx, g.get("kernel"), "game.kernel", {"alpha", "radius"})
    kernel = KernelSpec(**{key: _number(ctx, v, f"game.kernel.{key}") for key, v in k.items()})
    lam_raw = dict(_mapping(ctx, g.get("lambda"), "game.lambda",
                            {"variant", "lambda0", "lambda1", "table_x", "table_y"}))
    for key in ("lambda0", "lambda1"):
        if key in lam_raw:
            lam_raw[key] = _number(ctx, lam_raw[key], f"game.lambda.{key}")
    for key in ("table_x", "table_y"):
        if key in lam_raw:
            lam_raw[key] = tuple(lam_raw[key])
    lam = LambdaSpec(**lam_raw)
    return GameSpec(initial_judgments=x0, delta=delta, zeta=zeta, box_lo=lo, box_hi=hi,
                    horizon=horizon, kernel=kernel, lam=lam)


def _build_solver(ctx: _Ctx, raw) -> SolverConfig:
    s = _mapping(ctx, raw, "solver", _SOLVER_KEYS)
    kinds = {f.name: f.type for f in dataclasses.fields(SolverConfig)}
    clean = {}
    for key, value in s.items():
        path = f"solver.{key}"
        t = str(kinds[key])
        if value is None and "None" in t:
            clean[key] = None
        elif t.startswith("bool"):
            if not isinstance(value, bool):
                raise ctx.error(path, "expected true or false")
            clean[key] = value
        elif t.startswith("int"):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ctx.error(path, f"expected an integer, got {value!r}")
            clean[key] = value
        elif t.startswith("str"):
            clean[key] = str(value)
        else:
            clean[key] = _number(ctx, value, path)
    return SolverConfig(**clean)


def build_scenario(raw: dict, lines: dict | None = None, source: str | None = None) -> ScenarioFile:
    """Validate plain data (as read from YAML) into a :class:`ScenarioFile`."""
    ctx = _Ctx(lines or {}, source)
    raw = _mapping(ctx, raw, "", _TOP_KEYS)
    for key in ("name", "mode", "game"):
        if key not in raw:
            raise ctx.error(key, "missing required field")
    mode = raw["mode"]
    if mode not in MODES:
        raise ctx.error("mode", f"expected one of {MODES}, got {mode!r}")
    try:
        game = _build_game(ctx, raw["game"])
        weights = raw.get("weights")
        if weights is not None:
            if mode == "nash":
                raise ValidationError("nash mode does not take weights")
            weights = ParetoWeights(_per_agent(ctx, weights, "weights", game.initial_judgments))
        solver = _build_solver(ctx, raw.get("solver"))
        diagnostics = raw.get("diagnostics", DEFAULT_DIAGNOSTICS[mode])
        outputs = raw.get("outputs", OUTPUTS)
        for key, val in (("diagnostics", diagnostics), ("outputs", outputs)):
            if not isinstance(val, (list, tuple)):
                raise ctx.error(key, "expected a list")
        plot = raw.get("plot", "plane" if game.dim == 2 else "timeseries")
        return ScenarioFile(name=str(raw["name"]), mode=mode, game=game, weights=weights,
                            solver=solver, outputs=tuple(outputs), diagnostics=tuple(diagnostics),
                            plot=plot, description=str(raw.get("description") or ""))
    except ValidationError as e:
        where = f"{source}: " if source else ""
        raise ValidationError(f"{where}scenario {raw['name']!r}: {e}") from e


def parse_scenario(text: str, source: str | None = None) -> ScenarioFile:
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ParseError(str(getattr(e, "problem", e)), None, line, source) from None
    if not isinstance(raw, dict):
        raise ParseError("a scenario must be a YAML mapping", None, 1, source)
    return build_scenario(raw, _key_lines(node), source)


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), str(path))


def dump_scenario(scenario: ScenarioFile) -> str:
    return yaml.safe_dump(scenario.to_dict(), sort_keys=False, default_flow_style=None)


def _resolve_axis(axis: str) -> str:
    return AXIS_ALIASES.get(axis, axis)


def apply_overrides(scenario: ScenarioFile, overrides: dict | None) -> ScenarioFile:
    """New scenario with dotted-path fields of the canonical form replaced.

    Paths may use the short names of :data:`AXIS_ALIASES`.
    """
    if not overrides:
        return scenario
    raw = copy.deepcopy(scenario.to_dict())
    for axis, value in overrides.items():
        path = _resolve_axis(axis)
        parts = path.split(".")
        node = raw
        for p in parts[:-1]:
            if not isinstance(node, dict) or p not in node:
                raise KeyError(f"unknown scenario field {axis!r}")
            node = node[p]
        if not isinstance(node, dict) or parts[-1] not in node:
            raise KeyError(f"unknown scenario field {axis!r}")
        node[parts[-1]] = value
    return build_scenario(raw)


# ---------------------------------------------------------------- results

class Trajectories(NamedTuple):
    times: np.ndarray       # (n_nodes,)
    states: np.ndarray      # (n_nodes, N, d)
    controls: np.ndarray    # (n_nodes, N, d)
    name: str = ""


def json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"{type(o).__name__} is not JSON serializable")


def _json(data) -> str:
    return json.dumps(data, indent=2, default=json_default)


def _fmt(v: float) -> str:
    return repr(float(v))


def trajectory_csv(traj: Trajectories) -> str:
    """Long-form table ``t, agent, coord, x, omega``; floats written at full precision."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "agent", "coord", "x", "omega"])
    n_nodes, n, d = traj.states.shape
    for k in range(n_nodes):
        t = _fmt(traj.times[k])
        for i in range(n):
            for c in range(d):
                w.writerow([t, i, c, _fmt(traj.states[k, i, c]), _fmt(traj.controls[k, i, c])])
    return buf.getvalue()


def read_trajectory_csv(path, name: str = "") -> Trajectories:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no trajectory rows")
    times = sorted({float(r["t"]) for r in rows})
    n = 1 + max(int(r["agent"]) for r in rows)
    d = 1 + max(int(r["coord"]) for r in rows)
    index = {t: k for k, t in enumerate(times)}
    x = np.full((len(times), n, d), np.nan)
    w = np.full_like(x, np.nan)
    for r in rows:
        k, i, c = index[float(r["t"])], int(r["agent"]), int(r["coord"])
        x[k, i, c], w[k, i, c] = float(r["x"]), float(r["omega"])
    if np.isnan(x).any() or np.isnan(w).any():
        raise ValueError(f"{path}: incomplete trajectory table")
    return Trajectories(np.array(times), x, w, name)


def agreement_time(times: np.ndarray, states: np.ndarray, tol: float = AGREEMENT_TOL) -> float | None:
    """First time after which all true judgments stay within ``tol`` of each other (sup norm)."""
    spread = np.max(states.max(axis=1) - states.min(axis=1), axis=-1)
    outside = np.flatnonzero(spread > tol)
    if outside.size == 0:
        return float(times[0])
    if outside[-1] == len(times) - 1:
        return None
    return float(times[outside[-1] + 1])


@dataclass
class ResultBundle:
    scenario: ScenarioFile
    grid: TimeGrid
    controls: np.ndarray
    states: np.ndarray
    costs: np.ndarray
    intensity: float
    report: SolveReport
    diagnostics: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def trajectories(self) -> Trajectories:
        return Trajectories(self.grid.nodes, self.states, self.controls, self.scenario.name)

    def trajectory_csv(self) -> str:
        return trajectory_csv(self.trajectories)

    def costs_dict(self) -> dict:
        return {"costs": [float(c) for c in self.costs], "total": float(self.costs.sum()),
                "intensity_integral": float(self.intensity)}

    def report_dict(self) -> dict:
        return {"scenario": self.scenario.name, "mode": self.scenario.mode, "seed": self.seed,
                "grid_steps": self.grid.n_steps, "horizon": self.grid.horizon,
                "solver": self.report.to_dict(), "diagnostics": self.diagnostics,
                "agreement_time": agreement_time(self.grid.nodes, self.states)}

    def write(self, out_dir) -> Path:
        """Write the requested artifacts plus ``report.json``; one directory per bundle."""
        from .plotting import emit_plot

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if "trajectories_csv" in self.scenario.outputs:
            (out / "trajectories.csv").write_text(self.trajectory_csv(), encoding="utf-8")
        if "costs_json" in self.scenario.outputs:
            (out / "costs.json").write_text(_json(self.costs_dict()), encoding="utf-8")
        (out / "report.json").write_text(_json(self.report_dict()), encoding="utf-8")
        if "plot_svg" in self.scenario.outputs:
            (out / "plot.svg").write_text(emit_plot(self, self.scenario.plot), encoding="utf-8")
        (out / "scenario.yaml").write_text(dump_scenario(self.scenario), encoding="utf-8")
        return out


def _diagnose(scenario: ScenarioFile, controls, states, grid, seed: int) -> dict:
    spec, out = scenario.game, {}
    for name in scenario.diagnostics:
        if name == "consensus":
            out[name] = check_terminal_consensus(spec, states, controls).to_dict()
        elif name == "best_response":
            rows = []
            for i in range(spec.n_agents):
                r = best_response_check(spec, i, controls, grid=grid, seed=seed + i)
                rows.append({"agent": i, "cost": r.baseline_cost, "min_difference": r.min_difference,
                             "slack": r.slack, "passed": bool(r.passed)})
            out[name] = {"agents": rows, "passed": all(r["passed"] for r in rows)}
        elif name == "pareto_condition":
            c = check_pareto_condition(scenario.weights, spec)
            out[name] = {"holds": bool(c.holds), "lhs": float(c.lhs), "rhs": float(c.rhs)}
        elif name == "pareto_terminal":
            out[name] = check_pareto_terminal(spec, states, controls, scenario.weights).to_dict()
        elif name == "dominance":
            r = pareto_dominance_check(spec, controls, grid=grid, seed=seed)
            out[name] = {"n_challengers": r.n_challengers, "dominating": r.dominating,
                         "best_gain": float(r.best_gains.max()), "passed": bool(r.passed)}
    return out


def solve_scenario(scenario: ScenarioFile):
    """Run the solver matching the scenario's mode; returns a ``Solution``."""
    try:
        if scenario.mode == "nash":
            return solve_continuation(scenario.game, scenario.solver)
        return solve_pareto(scenario.game, scenario.weights, scenario.solver)
    except NonConvergence as e:
        raise NonConvergence(f"scenario {scenario.name!r}: {e}", e.report, e.segment) from e


def run_scenario(scenario: ScenarioFile, overrides: dict | None = None, out_dir=None,
                 seed: int = 0) -> ResultBundle:
    """Solve, diagnose and (when ``out_dir`` is given) write the artifacts."""
    scenario = apply_overrides(scenario, overrides)
    _, grid = resolve_layout(scenario.game.horizon, scenario.solver)
    log.info("running %s (%s, N=%d, d=%d, %d steps)", scenario.name, scenario.mode,
             scenario.game.n_agents, scenario.game.dim, grid.n_steps)
    sol = solve_scenario(scenario)
    spec = scenario.game
    costs = eval_costs(spec, sol.controls, sol.states, grid)
    if spec.lam.variant == "affine-decreasing" and spec.dim != 1:
        intensity = math.nan
    else:
        intensity = eval_intensity_integral(spec, sol.states, grid, sol.controls)
    bundle = ResultBundle(scenario, grid, sol.controls, sol.states, costs, intensity, sol.report,
                          _diagnose(scenario, sol.controls, sol.states, grid, seed), seed)
    if not np.all(np.isfinite(costs)):
        raise FloatingPointError(f"scenario {scenario.name!r}: non-finite costs {costs}")
    if out_dir is not None:
        bundle.write(out_dir)
    return bundle


# ---------------------------------------------------------------- sweeps

SUMMARY_COLUMNS = ("value", "converged", "iterations", "segments", "final_residual",
                   "cost_total", "intensity_integral", "terminal_spread", "agreement_time")


@dataclass
class SweepTable:
    axis: str
    values: list
    bundles: list

    def rows(self) -> list[dict]:
        out = []
        for value, b in zip(self.values, self.bundles):
            xT = b.states[-1]
            out.append({
                "value": value,
                "converged": b.report.converged,
                "iterations": b.report.iterations,
                "segments": b.report.segment_count,
                "final_residual": b.report.final_residual,
                "cost_total": float(b.costs.sum()),
                "intensity_integral": b.intensity,
                "terminal_spread": float(np.max(xT.max(axis=0) - xT.min(axis=0))),
                "agreement_time": agreement_time(b.grid.nodes, b.states),
            })
        return out

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({k: ("" if v is None else v) for k, v in row.items()})
        return buf.getvalue()

    def __len__(self) -> int:
        return len(self.bundles)


def _check_axis(scenario: ScenarioFile, axis: str) -> str:
    path = _resolve_axis(axis)
    node = scenario.to_dict()
    for p in path.split("."):
        if not isinstance(node, dict) or p not in node:
            raise KeyError(f"unknown sweep axis {axis!r}")
        node = node[p]
    scalar = node is None or (isinstance(node, (int, float)) and not isinstance(node, bool))
    if not (scalar or path in _BROADCAST_FIELDS):
        raise KeyError(f"sweep axis {axis!r} is not a scalar field")
    return path


def sweep(scenario: ScenarioFile, axis: str, values, seed: int = 0, out_dir=None,
          overrides: dict | None = None) -> SweepTable:
    """Run the scenario once per value of one scalar field, all with the same seed.

    With ``out_dir`` each run writes to its own ``<axis>=<value>`` subdirectory
    and a ``summary.csv`` comparison table is written alongside.
    """
    scenario = apply_overrides(scenario, overrides)
    path = _check_axis(scenario, axis)
    values = list(values)
    bundles = []
    for value in values:
        sub = None if out_dir is None else Path(out_dir) / f"{axis}={value}"
        bundles.append(run_scenario(scenario, {path: value}, sub, seed))
    table = SweepTable(axis, values, bundles)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "summary.csv").write_text(table.summary_csv(), encoding="utf-8")
    return table
