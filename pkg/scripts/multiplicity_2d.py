"""Distinct certified solution pairs on the symmetric 2-D box, plus c_k witnesses.

Usage: python3 scripts/multiplicity_2d.py [--m 47] [--k 4]
"""
import argparse

import numpy as np

from concave_convex.multiplicity import MultiSolveOptions, multi_solve
from concave_convex.reference import reference_2d_symmetric
from concave_convex.solver import ConvexSet, power_problem
from concave_convex.spectrum import eigenpairs, verify_ck_negative
from concave_convex.thresholds import PowerParams, admissible_radii


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=47)
    ap.add_argument("--k", type=int, default=4)
    args = ap.parse_args()
    params = reference_2d_symmetric(nodes_per_axis=args.m)
    r2 = admissible_radii(PowerParams(params.p, params.q, params.lam, params.V0)).r2
    problem = power_problem(params)
    pairs = eigenpairs(problem.op, args.k)
    for k in range(1, args.k + 1):
        ck = verify_ck_negative(problem.energy, pairs, k, np.logspace(-4, -1, 13), r_max=r2)
        print(f"k={k} mu={pairs.values[k - 1]:.6f} rho={ck.rho:.3e} sphere_sup={ck.sphere_sup:.4e} negative={ck.negative}")
    found = multi_solve(problem, ConvexSet.symmetric(r2), options=MultiSolveOptions(k=args.k), pairs=pairs)
    for i, rep in enumerate(found):
        print(f"[{i}] energy={rep.energy:.10e} sup={rep.sup_norm:.6e} min={rep.u.min():.3e} certified={rep.certified}")


if __name__ == "__main__":
    main()
