"""Finite-difference solver and certificates for concave-convex Schrodinger equations

    -Delta u + V(x) u = f(u) + lam |u|^(q-2) u   on R^N,  1 < q < 2,

with coercive potentials V >= V0 > 0 and possibly supercritical f, using
minimization over L-infinity boxes together with a pointwise invariance check.
"""
from .energy import NonlinearitySpec, ProblemParams, TruncatedNonlinearity
from .grid import Grid, GridSpec, build_grid
from .multiplicity import MultiSolveOptions, multi_solve
from .pipeline_2d import EmptyAdmissibleSet, solve_truncated
from .schrodinger_op import PotentialSpec, SchrodingerOperator, assemble
from .solver import ConvexSet, SolveReport, minimize_IK, power_problem
from .spectrum import eigenpairs, verify_ck_negative
from .thresholds import PowerParams, admissible_radii, admissible_radii_2d, lambda_critical, lambda_critical_2d

__version__ = "0.1.0"

__all__ = [
    "ConvexSet",
    "EmptyAdmissibleSet",
    "Grid",
    "GridSpec",
    "MultiSolveOptions",
    "NonlinearitySpec",
    "PotentialSpec",
    "PowerParams",
    "ProblemParams",
    "SchrodingerOperator",
    "SolveReport",
    "TruncatedNonlinearity",
    "admissible_radii",
    "admissible_radii_2d",
    "assemble",
    "build_grid",
    "eigenpairs",
    "lambda_critical",
    "lambda_critical_2d",
    "minimize_IK",
    "multi_solve",
    "power_problem",
    "solve_truncated",
    "verify_ck_negative",
]
