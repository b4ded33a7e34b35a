"""Planar problem with a general nonlinearity via truncation at the invariant radius."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import ProblemParams, TruncatedNonlinearity, detect_delta1, signed_power
from .grid import build_grid
from .schrodinger_op import assemble
from .solver import ConvexSet, SolveReport, minimize_IK, truncated_problem
from .thresholds import ThresholdResult, admissible_radii_2d

__all__ = ["EmptyAdmissibleSet", "TruncatedSolveReport", "solve_truncated", "untruncated_residual"]


class EmptyAdmissibleSet(ValueError):
    """No radius r < delta1 satisfies r^nu + lam r^(q-1) <= V0 r."""


@dataclass
class TruncatedSolveReport:
    report: SolveReport = field(repr=False)
    delta1: float
    radii: ThresholdResult
    lambda1: float
    r: float
    untruncated_residual: float
    truncation_inactive: bool

    @property
    def certified(self) -> bool:
        return self.report.certified and self.truncation_inactive


def untruncated_residual(params: ProblemParams, op, u) -> float:
    """|A u - f(u) - lam u|u|^(q-2)|_inf with the original, untruncated f."""
    rhs = params.nonlinearity.f(u) + params.lam * signed_power(u, params.q - 1.0)
    return float(np.max(np.abs(op.matrix @ u - rhs)))


def solve_truncated(params: ProblemParams, *, grad_tol: float = 1e-10, max_iter: int = 20000,
                    probes: int = 200, cert_tol: float = 1e-6) -> TruncatedSolveReport:
    """Truncate f at the largest admissible radius, minimize over [0, r], and check g(u) = f(u)."""
    if params.grid.dimension != 2:
        raise ValueError(f"the truncated pipeline is planar; got N={params.grid.dimension}")
    f = params.nonlinearity
    delta1 = detect_delta1(f)
    radii = admissible_radii_2d(f.nu, params.q, params.V0, delta1, params.lam)
    if not radii.nonempty:
        raise EmptyAdmissibleSet(
            f"lambda={params.lam} admits no radius below delta1={delta1:.6g} (Lambda1={radii.lambda_crit:.6g}); "
            f"flags={radii.flags}"
        )
    r = radii.radius
    trunc = TruncatedNonlinearity(f, r)
    op = assemble(build_grid(params.grid), params.potential)
    problem = truncated_problem(params, trunc, op)
    K = ConvexSet.positive_cone(r)
    rep = minimize_IK(problem, K, grad_tol=grad_tol, max_iter=max_iter, probes=probes, cert_tol=cert_tol)
    sup = rep.sup_norm
    # |u| <= r < delta1 means the truncation never acted: g(u) == f(u) at every node
    inactive = bool(sup <= r < delta1 or (sup <= r and math.isinf(delta1)))
    return TruncatedSolveReport(
        report=rep,
        delta1=delta1,
        radii=radii,
        lambda1=radii.lambda_crit,
        r=r,
        untruncated_residual=untruncated_residual(params, op, rep.u),
        truncation_inactive=inactive,
    )
