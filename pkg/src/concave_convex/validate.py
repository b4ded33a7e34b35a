"""Fast invariant checks over every module, run by ``concave-convex validate``.

Each check returns (passed, detail). Sizes are small so the whole suite runs
in a few seconds; the pytest suite covers the same properties more thoroughly.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .energy import (
    NonlinearitySpec,
    ProblemParams,
    TruncatedNonlinearity,
    grad_phi,
    grad_phi_bound,
    grad_upsilon,
    phi,
    psi,
    upsilon,
)
from .grid import GridSpec, build_grid, integrate
from .schrodinger_op import PotentialSpec, assemble, ev_norm, max_principle_bound, solve_linear
from .solver import ConvexSet, minimize_IK, power_problem, stationarity_check
from .spectrum import eigenpairs
from .thresholds import PowerParams, admissible_radii, h_power, lambda_critical

CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {}


def check(fn):
    CHECKS[fn.__name__] = fn
    return fn


def _op2d(m=9, pot=None):
    grid = build_grid(GridSpec(2, 3.0, m))
    return assemble(grid, pot or PotentialSpec.radial_power(3.0))


@check
def integrate_linear():
    grid = build_grid(GridSpec(2, 1.0, 11))
    rng = np.random.default_rng(1)
    u, v = rng.standard_normal((2, grid.size))
    lhs = integrate(grid, 2.5 * u - 0.5 * v)
    rhs = 2.5 * integrate(grid, u) - 0.5 * integrate(grid, v)
    return abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs)), f"defect {abs(lhs - rhs):.2e}"


@check
def quadrature_order():
    errs = []
    for m in (15, 31, 63):
        grid = build_grid(GridSpec(1, 1.0, m))
        x = grid.coords[:, 0]
        errs.append(abs(integrate(grid, (1 - x * x) ** 2) - 16 / 15))
    order = math.log2(errs[1] / errs[2])
    return order >= 1.9, f"observed order {order:.3f}"


@check
def operator_structure():
    op = _op2d()
    A = op.matrix
    sym = (A - A.T).count_nonzero() == 0
    off = A - __import__("scipy.sparse", fromlist=["diags"]).diags(A.diagonal())
    signs = bool(np.all(A.diagonal() > 0) and np.all(off.data <= 0))
    rowsum = np.asarray(A.sum(axis=1)).ravel()
    dom = bool(np.all(rowsum >= op.V0 - 1e-12))
    return sym and signs and dom, f"symmetric={sym} sign_pattern={signs} row_dominance={dom}"


@check
def max_principle_dense():
    op = _op2d(m=5)
    Ainv = np.linalg.inv(op.matrix.toarray())
    nonneg = bool(np.all(Ainv >= -1e-15))
    rows = float(np.max(Ainv.sum(axis=1)))
    rng = np.random.default_rng(2)
    ok = all(max_principle_bound(op, g, Ainv @ g, slack=0.0).holds for g in rng.uniform(-1, 1, (200, op.size)))
    return nonneg and rows <= 1 / op.V0 + 1e-15 and ok, f"min inverse entry ok={nonneg}, max row sum {rows:.4f}"


@check
def positivity_preserved():
    op = _op2d(m=15)
    rng = np.random.default_rng(3)
    worst = min(float(solve_linear(op, rng.uniform(0, 1, op.size)).min()) for _ in range(10))
    return worst >= -1e-12, f"min solution value {worst:.2e}"


@check
def energy_norm_is_gradient_quadrature():
    op = _op2d(m=5)
    grid = op.grid
    rng = np.random.default_rng(4)
    u = rng.standard_normal(grid.size)
    U = np.pad(grid.reshape(u), 1)
    grad2 = sum(np.sum(np.diff(U, axis=ax) ** 2) for ax in range(2)) / grid.h**2
    direct = grid.cell_volume * (grad2 + np.sum(op.V * u * u))
    return abs(direct - ev_norm(op, u) ** 2) <= 1e-12 * direct, f"defect {abs(direct - ev_norm(op, u) ** 2):.2e}"


@check
def threshold_trichotomy():
    rng = np.random.default_rng(5)
    r = np.logspace(-8, 4, 20001)
    bad = 0
    for _ in range(200):
        p, q, V0 = rng.uniform(2.2, 9), rng.uniform(1.05, 1.95), rng.uniform(0.2, 5)
        lam = lambda_critical(p, q, V0) * rng.uniform(0.02, 2)
        res = admissible_radii(PowerParams(p, q, lam, V0))
        inside = h_power(r, p - 2, q, lam) <= V0
        if res.regime == "empty":
            bad += bool(inside.any())
        elif res.regime == "interval":
            expect = (r >= res.r1) & (r <= res.r2)
            bad += bool(np.any(inside != expect)) or res.defect > 1e-10
    return bad == 0, f"{bad} disagreements in 200 samples"


@check
def gradient_bound_and_evenness():
    grid = build_grid(GridSpec(2, 2.0, 7))
    params = ProblemParams(grid.spec, PotentialSpec.radial_power(3.0), NonlinearitySpec.power(4.0), 1.5, 0.2)
    rng = np.random.default_rng(6)
    r = 0.7
    viol = sum(np.max(np.abs(grad_phi(params, u))) > grad_phi_bound(params, r)
               for u in rng.uniform(-r, r, (200, grid.size)))
    const = abs(np.max(np.abs(grad_phi(params, np.full(grid.size, r)))) - grad_phi_bound(params, r))
    u = rng.standard_normal(grid.size)
    even = phi(params, grid, u) == phi(params, grid, -u)
    return viol == 0 and const <= 1e-15 and even, f"violations={viol} const_defect={const:.1e} even={even}"


@check
def gradients_match_finite_differences():
    op = _op2d(m=7)
    grid = op.grid
    params = ProblemParams(grid.spec, PotentialSpec.radial_power(3.0), NonlinearitySpec.power(4.0), 1.5, 0.2)
    trunc = TruncatedNonlinearity(NonlinearitySpec.odd_exp(1, 1.0, 2.0), 0.6)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        u = rng.uniform(0.05, 0.5, grid.size) * rng.choice([-1, 1], grid.size)
        w = rng.standard_normal(grid.size)
        eps = 1e-6
        for fun, grad in ((lambda x: phi(params, grid, x), grad_phi(params, u)),
                          (lambda x: upsilon(trunc, 1.5, 0.2, grid, x), grad_upsilon(trunc, 1.5, 0.2, u))):
            fd = (fun(u + eps * w) - fun(u - eps * w)) / (2 * eps)
            an = grid.cell_volume * grad @ w
            worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    return worst <= 1e-5, f"worst relative error {worst:.2e}"


@check
def psi_convex():
    op = _op2d(m=7)
    rng = np.random.default_rng(8)
    ok = all(psi(op, 0.5 * (u + v)) <= 0.5 * (psi(op, u) + psi(op, v)) + 1e-14
             for u, v in rng.standard_normal((50, 2, op.size)))
    return ok, "midpoint convexity"


@check
def truncation_continuous():
    trunc = TruncatedNonlinearity(NonlinearitySpec.odd_exp(1, 1.0, 2.0), 0.5)
    r = trunc.r
    jump_g = abs(float(trunc.g(np.nextafter(r, 0))) - float(trunc.g(np.nextafter(r, 1))))
    jump_G = abs(float(trunc.G(np.nextafter(r, 0))) - float(trunc.G(np.nextafter(r, 1))))
    return jump_g < 1e-12 and jump_G < 1e-12, f"g jump {jump_g:.1e}, G jump {jump_G:.1e}"


@check
def spectrum_shift():
    op1 = _op2d(m=15)
    op2 = assemble(op1.grid, PotentialSpec.tabulated(op1.V + 1.0, V0=op1.V0 + 1.0))
    mu1, mu2 = eigenpairs(op1, 3).values, eigenpairs(op2, 3).values
    d = float(np.max(np.abs(mu2 - mu1 - 1.0)))
    return d <= 1e-8 and mu1[0] >= op1.V0, f"shift defect {d:.1e}"


@check
def tiny_solve_certified():
    grid = GridSpec(1, 2.0, 7)
    p, q = 4.0, 1.5
    lam = 0.5 * lambda_critical(p, q, 1.0)
    params = ProblemParams(grid, PotentialSpec.radial_power(4.0), NonlinearitySpec.power(p), q, lam)
    r2 = admissible_radii(PowerParams(p, q, lam, 1.0)).r2
    problem = power_problem(params)
    K = ConvexSet.positive_cone(r2)
    rep = minimize_IK(problem, K)
    margin = stationarity_check(problem, K, rep.u, 500)
    ok = rep.converged and rep.energy < 0 and rep.u.min() > 0 and margin >= -1e-12
    return ok, f"energy {rep.energy:.4e}, margin {margin:.1e}, certified {rep.certified}"


def run_all(names=None) -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in CHECKS.items():
        if names and name not in names:
            continue
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
