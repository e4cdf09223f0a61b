"""Command-line entry point: ``opinion-game {run,sweep,verify,plot}``.

Log verbosity comes from ``OPINION_GAME_LOG`` (e.g. ``DEBUG``, ``INFO``; default ``WARNING``).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import yaml

from .iteration import NonConvergence
from .model import ValidationError
from .plotting import PLOT_KINDS, emit_plot
from .scenario import ParseError, json_default, load_scenario, read_trajectory_csv, run_scenario, sweep

LOG_ENV = "OPINION_GAME_LOG"
DEFAULT_SEED = 0

log = logging.getLogger("opinion_game")


def _solver_overrides(args) -> dict:
    out = {}
    if args.grid is not None:
        out["solver.n_steps"] = args.grid
    if args.segments is not None:
        out["solver.segments"] = args.segments
    if args.tol is not None:
        out["solver.tolerance"] = args.tol
    return out


def _default_out(args, scenario) -> Path:
    return Path(args.out) if args.out else Path("results") / scenario.name


def _parse_values(text: str) -> list:
    """Comma-separated list; each item parsed as a YAML scalar (so ``1, 2.5, null`` work)."""
    if not text.strip():
        return []
    return [yaml.safe_load(item) for item in text.split(",")]


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _default_out(args, scenario)
    bundle = run_scenario(scenario, _solver_overrides(args), out, args.seed)
    r = bundle.report
    print(f"{scenario.name}: converged={r.converged} iterations={r.iterations} "
          f"segments={r.segment_count} residual={r.final_residual:.3g} wall={r.wall_time:.1f}s -> {out}")
    return 0


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _default_out(args, scenario)
    table = sweep(scenario, args.axis, _parse_values(args.values), args.seed, out, _solver_overrides(args))
    print(table.summary_csv(), end="")
    return 0


def cmd_verify(args) -> int:
    from .oracles import verify_scenario

    scenario = load_scenario(args.scenario)
    result = verify_scenario(scenario, args.seed)
    text = json.dumps(result, indent=2, default=json_default)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "verify.json").write_text(text, encoding="utf-8")
    print(text)
    return 0 if result["passed"] else 1


def cmd_plot(args) -> int:
    bundle = Path(args.bundle)
    stored = bundle / "scenario.yaml"
    scenario = load_scenario(stored) if stored.exists() else None
    traj = read_trajectory_csv(bundle / "trajectories.csv", scenario.name if scenario else bundle.name)
    default = "plane" if traj.states.shape[2] == 2 else "timeseries"
    kind = args.kind or (scenario.plot if scenario else default)
    target = Path(args.out) if args.out else bundle / "plot.svg"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(emit_plot(traj, kind), encoding="utf-8")
    print(target)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default results/<scenario name>)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for diagnostic sampling")
    common.add_argument("--grid", type=int, help="override the number of time steps")
    common.add_argument("--segments", type=int, help="override the number of continuation segments")
    common.add_argument("--tol", type=float, help="override the Picard tolerance")

    p = argparse.ArgumentParser(prog="opinion-game", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="solve a scenario and write its artifacts")
    run.add_argument("scenario")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", parents=[common], help="run a scenario over values of one field")
    sw.add_argument("scenario")
    sw.add_argument("--axis", required=True, help="scalar field, e.g. lambda1 or game.kernel.radius")
    sw.add_argument("--values", required=True, help="comma-separated values")
    sw.set_defaults(func=cmd_sweep)

    ver = sub.add_parser("verify", parents=[common], help="run the oracle battery on a scenario")
    ver.add_argument("scenario")
    ver.set_defaults(func=cmd_verify)

    pl = sub.add_parser("plot", help="render plot.svg from a bundle directory")
    pl.add_argument("bundle")
    pl.add_argument("--kind", choices=PLOT_KINDS)
    pl.add_argument("--out", help="target SVG path (default <bundle>/plot.svg)")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, KeyError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NonConvergence as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
