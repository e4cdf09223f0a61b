"""Run every shipped scenario (or the named ones) and write bundles under results/.

    python3 scripts/reproduce_figures.py                 # all scenarios
    python3 scripts/reproduce_figures.py fig2_consensus  # just one
    python3 scripts/reproduce_figures.py --sweeps        # also the lambda sweeps
"""
import argparse
import time
from pathlib import Path

from opinion_game.scenario import load_scenario, run_scenario, sweep

ROOT = Path(__file__).resolve().parents[1]
SWEEPS = {"truthful_exo": ("lambda1", [1.0, 7.0]), "fig6_exo": ("lambda0", [0.0, 5.0])}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("names", nargs="*", help="scenario names (default: all in scenarios/)")
    p.add_argument("--out", default=str(ROOT / "results"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweeps", action="store_true")
    args = p.parse_args()

    paths = sorted((ROOT / "scenarios").glob("*.yaml"))
    if args.names:
        paths = [ROOT / "scenarios" / f"{n}.yaml" for n in args.names]
    out = Path(args.out)
    for path in paths:
        scenario = load_scenario(path)
        start = time.perf_counter()
        b = run_scenario(scenario, out_dir=out / scenario.name, seed=args.seed)
        xT = b.states[-1].round(3).tolist()
        print(f"{scenario.name:20s} {time.perf_counter() - start:6.1f}s converged={b.report.converged} x(T)={xT}")
        if args.sweeps and scenario.name in SWEEPS:
            axis, values = SWEEPS[scenario.name]
            table = sweep(scenario, axis, values, args.seed, out / f"{scenario.name}_sweep_{axis}")
            print(table.summary_csv(), end="")


if __name__ == "__main__":
    main()
