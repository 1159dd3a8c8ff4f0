"""Recovery rate per method as the occupied area grows, including past 1/2.

Above half density the exhaustive search is capped at L//2 cells, so the
truth is out of reach and the rate drops to zero. MUSIC keeps working while
the correlation rank stays below L.
"""
import argparse
import logging
from fractions import Fraction

import numpy as np

from zakident import ModelParams, draw_coefficients
from zakident.experiment import ExperimentConfig, run_experiment, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=int, default=6)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="phase_transition.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.ERROR)

    params = ModelParams(args.L)
    M = draw_coefficients(params, np.random.default_rng([args.seed, 0]))
    deltas = [Fraction(k, args.L) for k in range(1, args.L)]
    cfg = ExperimentConfig(params=params, seed=args.seed, trials=args.trials,
                           delta_list=deltas, method="SOMP", timing=False, output=None)
    rows = {}
    for method in ("MUSIC", "SOMP"):
        cfg.method = method
        rows.update(summarize(run_experiment(cfg, M)))
    # the exhaustive search is only run where its budget allows
    cfg.method, cfg.delta_list = "MMV_EXHAUSTIVE", [d for d in deltas if d <= Fraction(1, 2)]
    rows.update(summarize(run_experiment(cfg, M)))

    print(f"{'delta':>6} {'MMV':>6} {'SOMP':>6} {'MUSIC':>6}")
    for d in deltas:
        cells = [rows.get((str(d), m)) for m in ("MMV_EXHAUSTIVE", "SOMP", "MUSIC")]
        print(f"{str(d):>6} " + " ".join("   n/a" if r is None else f"{r:6.2f}" for r in cells))
    with open(args.out, "w") as fh:
        fh.write("delta,method,rate\n")
        for (d, m), r in sorted(rows.items()):
            fh.write(f"{d},{m},{r}\n")


if __name__ == "__main__":
    main()
