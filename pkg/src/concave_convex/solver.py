"""Constrained energy minimization over sup-norm boxes and solution certificates.

A constrained minimizer u of I_K = Psi_K - Phi over a box K is certified as a
solution of A u = DPhi(u) in two independent ways:

* the variational inequality <DPhi(u), u - v> + Psi(v) - Psi(u) >= 0 is probed
  over many v in K (``stationarity_check``);
* v = A^{-1} DPhi(u) is computed and shown to lie in K, after which
  v = u is measured directly (``certify_invariance``).
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .energy import (
    ProblemParams,
    TruncatedNonlinearity,
    grad_phi,
    grad_phi_bound,
    grad_upsilon,
    phi,
    psi,
    upsilon,
    upsilon_bound,
)
from .grid import build_grid, check_field
from .schrodinger_op import SchrodingerOperator, assemble, ev_norm, solve_linear
from .spectrum import eigenpairs

log = logging.getLogger(__name__)

__all__ = [
    "Problem",
    "ConvexSet",
    "InvarianceReport",
    "SolveReport",
    "power_problem",
    "truncated_problem",
    "project",
    "symmetrize",
    "default_seed",
    "minimize_IK",
    "stationarity_check",
    "certify_invariance",
    "fixed_point_iterate",
    "pde_residual",
    "kkt_residual",
]


@dataclass(frozen=True, eq=False)
class Problem:
    """Discrete functional I(u) = Psi(u) - nonlinear(u) with Psi(u) = h^N u.Au / 2.

    ``nonlinear_grad`` is the nodal derivative of ``nonlinear`` (pairing h^N),
    ``grad_bound(r)`` bounds its sup norm over the ball of radius r.
    """

    op: SchrodingerOperator
    nonlinear: Callable[[np.ndarray], float]
    nonlinear_grad: Callable[[np.ndarray], np.ndarray]
    grad_bound: Callable[[float], float]
    name: str = "power"

    @property
    def grid(self):
        return self.op.grid

    @property
    def V0(self) -> float:
        return self.op.V0

    def energy(self, u) -> float:
        return psi(self.op, u) - self.nonlinear(u)

    def gradient(self, u) -> np.ndarray:
        return self.op.matrix @ u - self.nonlinear_grad(u)


def power_problem(params: ProblemParams, op: SchrodingerOperator | None = None) -> Problem:
    if op is None:
        op = assemble(build_grid(params.grid), params.potential)
    grid = op.grid
    return Problem(
        op=op,
        nonlinear=lambda u: phi(params, grid, u),
        nonlinear_grad=lambda u: grad_phi(params, u),
        grad_bound=lambda r: grad_phi_bound(params, r),
        name="power",
    )


def truncated_problem(params: ProblemParams, trunc: TruncatedNonlinearity,
                      op: SchrodingerOperator | None = None) -> Problem:
    if op is None:
        op = assemble(build_grid(params.grid), params.potential)
    grid, q, lam, nu = op.grid, params.q, params.lam, trunc.base.nu
    return Problem(
        op=op,
        nonlinear=lambda u: upsilon(trunc, q, lam, grid, u),
        nonlinear_grad=lambda u: grad_upsilon(trunc, q, lam, u),
        grad_bound=lambda r: upsilon_bound(nu, q, lam, r),
        name="truncated",
    )


@dataclass(frozen=True)
class ConvexSet:
    """Nodal box {lower <= u <= upper}."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")

    @classmethod
    def positive_cone(cls, r: float) -> "ConvexSet":
        return cls(0.0, r)

    @classmethod
    def symmetric(cls, r: float) -> "ConvexSet":
        return cls(-r, r)

    @property
    def radius(self) -> float:
        return max(abs(self.lower), abs(self.upper))

    def contains(self, u, atol: float = 0.0) -> bool:
        u = np.asarray(u)
        return bool(np.all(u >= self.lower - atol) and np.all(u <= self.upper + atol))


def project(u, K: ConvexSet) -> np.ndarray:
    return np.clip(u, K.lower, K.upper)


def symmetrize(u, grid, parity: Sequence[int] | None) -> np.ndarray:
    """Project onto fields with u(R_i x) = parity[i] u(x); parity entries 0 impose nothing."""
    if parity is None:
        return u
    for ax, s in enumerate(parity):
        if s:
            u = 0.5 * (u + s * u[grid.reflection_index(ax)])
    return u


@dataclass(frozen=True)
class InvarianceReport:
    v: np.ndarray = field(repr=False)
    sup_norm_v: float
    r: float
    slack: float
    bound: float
    bound_ok: bool
    box_ok: bool
    nonneg_ok: bool
    fixed_point_gap: float
    certified: bool


@dataclass
class SolveReport:
    u: np.ndarray = field(repr=False)
    energy: float
    kkt_residual: float
    stationarity_margin: float
    invariance: InvarianceReport | None
    iterations: int
    converged: bool
    pde_residual: float = math.nan
    history: list = field(default_factory=list, repr=False)
    message: str = ""

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.u)))

    @property
    def certified(self) -> bool:
        return self.invariance is not None and self.invariance.certified


def pde_residual(problem: Problem, u) -> float:
    """Strong-form discrete residual |A u - DPhi(u)|_inf."""
    u = check_field(problem.grid, u)
    return float(np.max(np.abs(problem.gradient(u))))


def kkt_residual(problem: Problem, u, K: ConvexSet, parity=None) -> float:
    """|u - P(u - D^{-1} grad I(u))|_{E_V}: zero exactly at constrained critical points."""
    D = problem.op.diagonal
    step = symmetrize(project(u - problem.gradient(u) / D, K), problem.grid, parity) - u
    return ev_norm(problem.op, step)


def default_seed(problem: Problem, K: ConvexSet, direction: np.ndarray | None = None,
                 parity=None) -> np.ndarray:
    """t0 * clip(e, K) with e the first eigenfield (or ``direction``), scaled so I < 0."""
    if direction is None:
        direction = eigenpairs(problem.op, 1).field(0)
    e = symmetrize(np.asarray(direction, dtype=float), problem.grid, parity)
    top = np.max(np.abs(e))
    if top == 0:
        raise ValueError("seed direction vanishes")
    e = project(e / top, ConvexSet(max(K.lower, -1.0), 1.0) if K.lower < 0 else ConvexSet(0.0, 1.0))
    t = 0.5 * K.radius
    for _ in range(80):
        seed = project(t * e, K)
        if problem.energy(seed) < 0:
            return seed
        t *= 0.5
    raise RuntimeError("no negative-energy seed found along the seed direction")


def minimize_IK(
    problem: Problem,
    K: ConvexSet,
    *,
    seed: np.ndarray | None = None,
    max_iter: int = 20000,
    grad_tol: float = 1e-10,
    parity=None,
    deflation: "Deflation | None" = None,
    certify: bool = True,
    probes: int = 200,
    probe_seed: int = 0,
    cert_tol: float = 1e-6,
    armijo: float = 1e-4,
) -> SolveReport:
    """Minimize the energy over the box K by diagonally scaled projected gradient.

    Steps follow the projection arc u(t) = P(u - t D^{-1} grad I), D = diag(A),
    with Barzilai-Borwein trial lengths and Armijo backtracking, so the energy
    never increases beyond rounding. Stops once ``kkt_residual <= grad_tol``.
    """
    grid, op = problem.grid, problem.op
    D = op.diagonal
    hN = grid.cell_volume
    if seed is None:
        seed = default_seed(problem, K, parity=parity)
    u = symmetrize(project(check_field(grid, seed).copy(), K), grid, parity)

    def merit(w):
        e = problem.energy(w)
        return e + deflation.penalty(w) if deflation is not None else e

    def direction(w):
        g = problem.gradient(w)
        return g + deflation.penalty_grad(w) if deflation is not None else g

    E, M = problem.energy(u), merit(u)
    if not math.isfinite(E):
        raise FloatingPointError("energy is not finite at the seed; check exponents")
    g = direction(u)
    tau = 1.0
    history = []
    converged = False
    message = "max_iter reached"
    it = 0
    for it in range(max_iter + 1):
        pg = symmetrize(project(u - g / D, K), grid, parity) - u
        kkt = ev_norm(op, pg)
        history.append((it, E, kkt))
        if kkt <= grad_tol:
            converged, message = True, "converged"
            break
        if it == max_iter:
            break
        t = tau
        tol_E = 1e-14 * max(1.0, abs(M))
        while True:
            trial = symmetrize(project(u - t * (g / D), K), grid, parity)
            d = trial - u
            Mt = merit(trial)
            if not math.isfinite(Mt):
                raise FloatingPointError("energy became non-finite during line search")
            if Mt <= M + armijo * hN * (g @ d) + tol_E:
                break
            t *= 0.5
            if t < 1e-14:
                break
        if t < 1e-14:
            message = "line search stalled"
            break
        gt = direction(trial)
        s, y = trial - u, gt - g
        sy = s @ y
        tau = float(np.clip((s @ (D * s)) / sy, 1e-6, 1e6)) if sy > 0 else 1e6
        u, g, M = trial, gt, Mt
        E = problem.energy(u) if deflation is not None else Mt
    E = problem.energy(u)
    kkt = kkt_residual(problem, u, K, parity)
    if deflation is not None:
        # deflated runs stop on the modified landscape; the true residual decides
        converged = kkt <= grad_tol
    report = SolveReport(u=u, energy=E, kkt_residual=kkt, stationarity_margin=math.nan, invariance=None,
                         iterations=it, converged=converged, history=history, message=message,
                         pde_residual=pde_residual(problem, u))
    if certify:
        finalize_report(problem, K, report, probes=probes, cert_tol=cert_tol, grad_tol=grad_tol, seed=probe_seed)
    return report


def finalize_report(problem: Problem, K: ConvexSet, report: SolveReport, probes: int = 200,
                    cert_tol: float = 1e-6, grad_tol: float = 1e-10, seed: int = 0) -> SolveReport:
    """Attach the stationarity margin and invariance certificate; recompute ``converged``."""
    report.stationarity_margin = stationarity_check(problem, K, report.u, probes, seed=seed)
    report.invariance = certify_invariance(problem, report.u, K.radius, K=K, tol=cert_tol)
    report.converged = bool(report.kkt_residual <= grad_tol and report.invariance.certified)
    return report


def stationarity_check(problem: Problem, K: ConvexSet, u, probes: int = 1000, seed: int = 0,
                       delta: float | None = None) -> float:
    """Most negative value of <DPhi(u), u - v> + Psi(v) - Psi(u) over probe points v in K.

    Probes are seeded random points of K, random small perturbations of u
    projected to K, and single-node moves P(u +- delta e_i). Differences of
    Psi are computed in closed form to avoid cancellation.
    """
    op, grid = problem.op, problem.grid
    u = check_field(grid, u)
    if not K.contains(u, atol=1e-12):
        raise ValueError("stationarity_check needs u in K")
    hN = grid.cell_volume
    A = op.matrix
    Au = A @ u
    dphi = problem.nonlinear_grad(u)
    if delta is None:
        delta = 1e-3 * K.radius
    rng = np.random.default_rng(seed)

    def lhs(w):
        d = w - u
        return hN * (-(dphi @ d) + Au @ d + 0.5 * (d @ (A @ d)))

    worst = lhs(u)
    n_rand = max(1, probes // 4)
    for _ in range(n_rand):
        worst = min(worst, lhs(rng.uniform(K.lower, K.upper, size=u.shape)))
    for scale in np.logspace(-6, -1, max(1, probes // 4)):
        w = project(u + scale * K.radius * rng.standard_normal(u.shape), K)
        worst = min(worst, lhs(w))
    # single-node moves, vectorized: step s_i with A_ii curvature
    n_nodes = min(grid.size, max(1, probes // 2))
    nodes = np.sort(rng.choice(grid.size, size=n_nodes, replace=False)) if n_nodes < grid.size else np.arange(grid.size)
    diag = op.diagonal[nodes]
    for sign in (1.0, -1.0):
        s = np.clip(u[nodes] + sign * delta, K.lower, K.upper) - u[nodes]
        vals = hN * (s * (Au[nodes] - dphi[nodes]) + 0.5 * diag * s * s)
        worst = min(worst, float(vals.min()))
    return float(worst)


def certify_invariance(problem: Problem, u, r: float, K: ConvexSet | None = None, tol: float = 1e-6,
                       rel_tol: float = 1e-12) -> InvarianceReport:
    """Solve A v = DPhi(u) and check v stays in the ball of radius r (and in K)."""
    op = problem.op
    u = check_field(problem.grid, u)
    g = problem.nonlinear_grad(u)
    v = solve_linear(op, g, rel_tol=rel_tol)
    slack = float(np.max(np.abs(op.matrix @ v - g))) if np.any(g) else 0.0
    sup_v = float(np.max(np.abs(v)))
    bound = problem.grad_bound(r)
    bound_ok = op.V0 * sup_v <= bound + slack
    box_ok = sup_v <= r + slack / op.V0
    nonneg_ok = True
    if K is not None and K.lower >= 0:
        nonneg_ok = bool(np.min(v) >= K.lower - slack / op.V0)
    gap = ev_norm(op, v - u)
    certified = bool(box_ok and nonneg_ok and gap <= tol * max(1.0, ev_norm(op, u)))
    return InvarianceReport(v=v, sup_norm_v=sup_v, r=r, slack=slack, bound=bound, bound_ok=bool(bound_ok),
                            box_ok=bool(box_ok), nonneg_ok=nonneg_ok, fixed_point_gap=gap, certified=certified)


def fixed_point_iterate(problem: Problem, u0, r: float, max_iter: int = 500, tol: float = 1e-10,
                        probes: int = 200, cert_tol: float = 1e-6) -> SolveReport:
    """Successive approximations u_{k+1} = A^{-1} DPhi(u_k) inside the ball of radius r.

    Convergence is not guaranteed; the gap history is kept in ``history`` as
    (iteration, energy, E_V gap, sup norm) and oscillation is reported in
    ``message``.
    """
    op = problem.op
    u = check_field(problem.grid, u0).copy()
    if np.max(np.abs(u)) > r:
        raise ValueError("u0 must lie in the ball of radius r")
    K = ConvexSet(0.0, r) if np.all(u >= 0) else ConvexSet(-r, r)
    history = []
    converged = False
    message = "max_iter reached"
    k = 0
    for k in range(1, max_iter + 1):
        nxt = solve_linear(op, problem.nonlinear_grad(u), rel_tol=1e-12) if np.any(u) else np.zeros_like(u)
        gap = ev_norm(op, nxt - u)
        u = nxt
        history.append((k, problem.energy(u), gap, float(np.max(np.abs(u)))))
        if gap <= tol * max(1.0, ev_norm(op, u)):
            converged, message = True, "converged"
            break
    if not converged and len(history) >= 10:
        gaps = np.array([h[2] for h in history[-10:]])
        if np.any(np.diff(gaps) > 0):
            message = "max_iter reached; gap history oscillates"
    report = SolveReport(u=u, energy=problem.energy(u), kkt_residual=kkt_residual(problem, u, K),
                         stationarity_margin=math.nan, invariance=None, iterations=k, converged=converged,
                         history=history, message=message, pde_residual=pde_residual(problem, u))
    if K.contains(u, atol=1e-12):
        finalize_report(problem, K, report, probes=probes, cert_tol=cert_tol, grad_tol=math.inf)
        report.converged = converged and report.invariance.certified
    return report


@dataclass
class Deflation:
    """Penalty sigma * (prod_i max(1, d^2 / |u - u_i|^2_{E_V}) - 1) around known solutions.

    Used only in the merit of the line search and the search direction; never
    in certificates.
    """

    op: SchrodingerOperator
    known: list
    radius: float
    weight: float

    def _factors(self, u):
        out = []
        for w in self.known:
            dist2 = ev_norm(self.op, u - w) ** 2
            out.append((w, dist2, max(1.0, self.radius**2 / max(dist2, 1e-300))))
        return out

    def penalty(self, u) -> float:
        prod = 1.0
        for _, _, f in self._factors(u):
            prod *= f
        return self.weight * (prod - 1.0)

    def penalty_grad(self, u) -> np.ndarray:
        facs = self._factors(u)
        prod = 1.0
        for _, _, f in facs:
            prod *= f
        grad = np.zeros_like(u)
        for w, dist2, f in facs:
            if f > 1.0:
                # d/du (d^2/|u-w|^2) = -d^2/|u-w|^4 * 2 A (u-w), nodal form divides out h^N
                grad += (prod / f) * (-self.radius**2 / dist2**2) * 2.0 * (self.op.matrix @ (u - w))
        return self.weight * grad


def warn_outside_threshold(lam: float, lam_crit: float) -> None:
    if not 0 < lam < lam_crit:
        warnings.warn(f"lambda={lam} lies outside (0, {lam_crit}); no invariant radius is guaranteed",
                      RuntimeWarning, stacklevel=2)
