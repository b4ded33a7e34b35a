"""Energy and sup norm of the certified solution as L doubles at fixed spacing h.

Usage: python3 scripts/domain_stability.py [--dim 2] [--m 31] [--L 4]
"""
import argparse

from concave_convex.reference import reference_2d_symmetric, reference_3d
from concave_convex.solver import ConvexSet, minimize_IK, power_problem
from concave_convex.thresholds import PowerParams, admissible_radii


def solve(params):
    r2 = admissible_radii(PowerParams(params.p, params.q, params.lam, params.V0)).r2
    return minimize_IK(power_problem(params), ConvexSet.positive_cone(r2))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, default=2, choices=(2, 3))
    ap.add_argument("--m", type=int, default=31)
    ap.add_argument("--L", type=float, default=4.0)
    args = ap.parse_args()
    make = reference_2d_symmetric if args.dim == 2 else reference_3d
    # m -> 2m + 1 keeps h = 2L/(m+1) fixed when L doubles
    reps = [solve(make(args.L, args.m)), solve(make(2 * args.L, 2 * args.m + 1))]
    for L, rep in zip((args.L, 2 * args.L), reps):
        print(f"L={L:g} energy={rep.energy:.8e} sup={rep.sup_norm:.8e} certified={rep.certified}")
    a, b = reps
    print(f"relative energy change {abs(b.energy - a.energy) / abs(a.energy):.3e}")
    print(f"relative sup change    {abs(b.sup_norm - a.sup_norm) / a.sup_norm:.3e}")


if __name__ == "__main__":
    main()
