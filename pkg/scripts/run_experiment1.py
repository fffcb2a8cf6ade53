"""Experiment 1 analog: evolve on surfaces A and B, then test which parameters differ.

    python scripts/run_experiment1.py --config configs/exp1.ini --out results/exp1

Writes the run logs under <out>/runs and the analysis tables (fronts,
hypervolume convergence, significance, mean trajectories, KDEs) under
<out>/analysis, then prints the summary.
"""

import argparse
from pathlib import Path

from quadevo.config import load_config
from quadevo.experiments import analyze, evolve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=Path(__file__).parents[1] / "configs" / "exp1.ini")
    ap.add_argument("--out", type=Path, default=Path("results/exp1"))
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    evolve(load_config(args.config), jobs=args.jobs, out_root=args.out)
    result = analyze(args.out, None, args.out / "analysis")
    print("\n".join(result["summary"]))


if __name__ == "__main__":
    main()
