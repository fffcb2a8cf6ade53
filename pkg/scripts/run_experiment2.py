"""Experiment 2 analog: re-test front individuals on all four surfaces.

    python scripts/run_experiment2.py --runs results/exp1 --seed 0

Needs the run logs of experiment 1. Six individuals per training surface are
drawn from the merged fronts, evaluated 20 times on each surface, and the
normalized cross-surface distance matrix is printed with the within- and
cross-hardness-class means.
"""

import argparse
from pathlib import Path

from quadevo.analysis.surfaces import class_contrast
from quadevo.experiments import analyze, reevaluate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=Path, default=Path("results/exp1"))
    ap.add_argument("--out", type=Path, default=Path("results/exp2"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    reeval = reevaluate(args.runs, args.out / "reeval.csv", args.seed)
    result = analyze(args.runs, reeval, args.out / "analysis")
    names, m = result["distance_names"], result["distance_matrix"]
    within, across = class_contrast(names, m, [("A", "C"), ("B", "D")], [("A", "B"), ("A", "D"), ("C", "B"), ("C", "D")])
    print("\n".join(result["summary"]))
    print(f"within hardness class: {within:.3f}   across classes: {across:.3f}")


if __name__ == "__main__":
    main()
