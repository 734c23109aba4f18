"""Print computed energies next to the tabulated values for every case.

Usage: python3 scripts/reproduce_tables.py [--tol 1.5e-3]
"""

import argparse

from finite_rank import tables
from finite_rank.potential import PotentialSpec
from finite_rank.solver import SolverConfig, solve_spectrum


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--tol", type=float, default=tables.DEFAULT_TOL)
    args = parser.parse_args()

    fixture = tables.load_fixtures()
    bad = total = 0
    for case in fixture.cases():
        lam, p, n, r = case
        result = solve_spectrum(SolverConfig(n, r), PotentialSpec(p, lam))
        print(f"\nlambda={lam:g} P={p} N={n} R={r}")
        print(f"{'i':>3} {'l':>2} {'computed':>12} {'table':>10} {'diff':>10}")
        for row in fixture.column(case):
            root = result.roots[row.i - 1]
            diff = root.energy - row.energy
            flag = "  <--" if abs(diff) > args.tol else ""
            bad += abs(diff) > args.tol
            total += 1
            print(f"{row.i:>3} {root.sector_l:>2} {root.energy:>12.6f} {row.energy:>10.3f} {diff:>+10.2e}{flag}")
        for i, root in enumerate(result.roots[len(fixture.column(case)) :], start=len(fixture.column(case)) + 1):
            print(f"{i:>3} {root.sector_l:>2} {root.energy:>12.6f} {'-':>10}")
    print(f"\n{total - bad}/{total} entries within {args.tol:g}")


if __name__ == "__main__":
    main()
