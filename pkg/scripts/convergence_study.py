"""Lowest roots of each sector as R grows at fixed N, against Galerkin N=R=20.

Usage: python3 scripts/convergence_study.py --lambda 0.1 --power 4 --n-rank 4
"""

import argparse

import numpy as np

from finite_rank.oracle import galerkin_diagonalize
from finite_rank.potential import PotentialSpec
from finite_rank.solver import SolverConfig, solve_spectrum


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--lambda", dest="coupling", type=float, default=0.1)
    parser.add_argument("--power", type=int, default=4, choices=(3, 4))
    parser.add_argument("--n-rank", type=int, default=4)
    parser.add_argument("--r-max", type=int, default=20)
    args = parser.parse_args()

    spec = PotentialSpec(args.power, args.coupling)
    reference = galerkin_diagonalize(args.r_max, spec)
    print(f"lambda={args.coupling:g} P={args.power} N={args.n_rank}; reference E1..E4 = {np.round(reference[:4], 6)}")
    print(f"{'R':>3} {'roots':>5} {'E1':>12} {'|E1 - ref|':>11}  lowest root per sector")
    for r in range(args.n_rank, args.r_max + 1):
        result = solve_spectrum(SolverConfig(args.n_rank, r), spec)
        lowest = {}
        for root in result.roots:
            lowest.setdefault(root.sector_l, root.energy)
        per_sector = " ".join(f"l={l}:{e:.6f}" for l, e in sorted(lowest.items()))
        e1 = result.energies[0]
        print(f"{r:>3} {len(result.roots):>5} {e1:>12.6f} {abs(e1 - reference[0]):>11.2e}  {per_sector}")


if __name__ == "__main__":
    main()
