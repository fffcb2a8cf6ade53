"""Derive the stability scale constant from random-search individuals.

The raw (unscaled) stability of uniformly random genomes is collected on all
four library surfaces; the scale maps the pooled 5th percentile worst value
onto -1.

    python scripts/calibrate_stability.py --n 1000
"""

import argparse

import numpy as np

from quadevo import params
from quadevo.fitness import raw_stability
from quadevo.surrogate import rollout, surface_library


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000, help="random genomes per surface")
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    values = []
    for surface in surface_library().values():
        for i in range(args.n):
            trace = rollout(params.decode(rng.random(params.N_GENES)), surface, i)
            if not trace.failed:
                values.append(raw_stability(trace))
    q05 = float(np.quantile(values, 0.05))
    print(f"samples={len(values)} q05={q05:.6f} scale={-1.0 / q05:.6f}")


if __name__ == "__main__":
    main()
