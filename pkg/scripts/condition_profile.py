"""Worst-case beta/alpha over all supports of each size for a drawn A_c."""
import argparse

import numpy as np

from zakident import ModelParams, draw_coefficients
from zakident.certify import condition_profile


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=int, default=5)
    ap.add_argument("--kmax", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    M = draw_coefficients(ModelParams(args.L), np.random.default_rng([args.seed, 0]))
    for row in condition_profile(M, args.kmax):
        print(f"k={row.k:2d}  worst beta/alpha={row.worst_ratio:.4g}  at {row.argmax_support}")


if __name__ == "__main__":
    main()
