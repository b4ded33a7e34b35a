"""Search for several distinct certified solutions on the symmetric box [-r, r]."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .solver import (
    ConvexSet,
    Deflation,
    Problem,
    SolveReport,
    default_seed,
    finalize_report,
    kkt_residual,
    minimize_IK,
    pde_residual,
    symmetrize,
)
from .spectrum import EigenPairs, eigenpairs

log = logging.getLogger(__name__)

__all__ = ["MultiSolveOptions", "multi_solve", "reflection_parities", "DEFAULT_STRATEGIES"]

DEFAULT_STRATEGIES = ("eigen_seeds", "symmetry", "deflation", "odd_pair")


@dataclass(frozen=True)
class MultiSolveOptions:
    k: int = 4
    grad_tol: float = 1e-10
    max_iter: int = 20000
    residual_tol: float | None = None  # default 1e-6 * V0 * r
    cert_tol: float = 1e-6
    probes: int = 200
    deflation_rounds: int = 2
    probe_seed: int = 0


def reflection_parities(problem: Problem) -> list[tuple[int, ...]]:
    """Parity classes (one sign per axis) under which the potential is invariant."""
    grid = problem.grid
    V = problem.op.V
    sym_axes = [bool(np.array_equal(V, V[grid.reflection_index(ax)])) for ax in range(grid.dim)]
    choices = [(1, -1) if ok else (0,) for ok in sym_axes]
    return [tuple(c) for c in itertools.product(*choices)]


def _accept(problem: Problem, K: ConvexSet, rep: SolveReport, res_tol: float, grad_tol: float) -> bool:
    return (
        rep.certified
        and rep.kkt_residual <= grad_tol
        and rep.pde_residual <= res_tol
        and rep.stationarity_margin >= -1e-8 * max(1.0, abs(rep.energy))
        and rep.energy < 0
    )


def _order_key(rep: SolveReport):
    return (round(rep.energy, 12), tuple(np.round(rep.u, 12)))


def multi_solve(problem: Problem, K: ConvexSet, strategies=DEFAULT_STRATEGIES,
                options: MultiSolveOptions = MultiSolveOptions(), pairs: EigenPairs | None = None) -> list[SolveReport]:
    """Certified, pairwise-distinct negative-energy solutions found by the given strategies.

    Strategies:
      * ``eigen_seeds``: plain descent from +-t e_j, j = 1..k;
      * ``symmetry``: descent restricted to each reflection-parity class of
        the grid (valid because the functional is invariant under those
        reflections), seeded by the eigenfields projected onto the class;
      * ``deflation``: descent with a penalty around solutions already found,
        then undeflated polishing;
      * ``odd_pair``: -u is certified and added for each found u.

    Distinct means sup-norm separation above 1e3 times the residual tolerance.
    Results are ordered by energy, then lexicographically by field.
    """
    if K.lower != -K.upper:
        raise ValueError("multi_solve needs a symmetric box [-r, r]")
    unknown = set(strategies) - set(DEFAULT_STRATEGIES)
    if unknown:
        raise ValueError(f"unknown strategies {sorted(unknown)}")
    r = K.upper
    res_tol = options.residual_tol if options.residual_tol is not None else 1e-6 * problem.V0 * r
    radius = 1e3 * res_tol
    if pairs is None:
        pairs = eigenpairs(problem.op, options.k)
    kw = dict(grad_tol=options.grad_tol, max_iter=options.max_iter, probes=options.probes, cert_tol=options.cert_tol,
              probe_seed=options.probe_seed)

    candidates: list[SolveReport] = []

    def run(seed_dir, parity=None):
        try:
            seed = default_seed(problem, K, direction=seed_dir, parity=parity)
        except (ValueError, RuntimeError):
            return None
        rep = minimize_IK(problem, K, seed=seed, parity=parity, **kw)
        if parity is not None:
            # re-certify without the symmetry restriction
            rep.kkt_residual = kkt_residual(problem, rep.u, K)
            finalize_report(problem, K, rep, probes=options.probes, cert_tol=options.cert_tol,
                            grad_tol=options.grad_tol, seed=options.probe_seed)
        ok = _accept(problem, K, rep, res_tol, options.grad_tol)
        log.info("seed parity=%s energy=%.6g kkt=%.2e accepted=%s", parity, rep.energy, rep.kkt_residual, ok)
        return rep if ok else None

    if "eigen_seeds" in strategies:
        for j in range(options.k):
            for sign in (1.0, -1.0):
                rep = run(sign * pairs.field(j))
                if rep is not None:
                    candidates.append(rep)

    if "symmetry" in strategies:
        for parity in reflection_parities(problem):
            if not any(parity):
                continue
            for j in range(options.k):
                e = pairs.field(j)
                proj = symmetrize(e, problem.grid, parity)
                if np.max(np.abs(proj)) < 1e-8 * np.max(np.abs(e)):
                    continue
                rep = run(proj, parity)
                if rep is not None:
                    candidates.append(rep)
                break

    if "deflation" in strategies:
        for _ in range(options.deflation_rounds):
            known = [c.u for c in _distinct(candidates, radius)]
            if not known:
                break
            d = 0.5 * min((np.sqrt(problem.grid.cell_volume * c @ (problem.op.matrix @ c)) for c in known))
            weight = max(abs(c.energy) for c in _distinct(candidates, radius))
            defl = Deflation(problem.op, known, radius=d, weight=weight)
            found = False
            for j in range(options.k):
                try:
                    seed = default_seed(problem, K, direction=pairs.field(j))
                except (ValueError, RuntimeError):
                    continue
                pre = minimize_IK(problem, K, seed=seed, deflation=defl, certify=False,
                                  max_iter=min(options.max_iter, 2000), grad_tol=options.grad_tol)
                rep = minimize_IK(problem, K, seed=pre.u, **kw)
                if _accept(problem, K, rep, res_tol, options.grad_tol) and _is_new(rep, candidates, radius):
                    candidates.append(rep)
                    found = True
            if not found:
                break

    if "odd_pair" in strategies:
        for rep in list(candidates):
            neg = _negated(problem, K, rep, options)
            if _accept(problem, K, neg, res_tol, options.grad_tol):
                candidates.append(neg)

    return _distinct(candidates, radius)


def _negated(problem: Problem, K: ConvexSet, rep: SolveReport, options: MultiSolveOptions) -> SolveReport:
    u = -rep.u
    out = SolveReport(u=u, energy=problem.energy(u), kkt_residual=kkt_residual(problem, u, K),
                      stationarity_margin=math.nan, invariance=None, iterations=0, converged=False,
                      pde_residual=pde_residual(problem, u), message="odd pair of a certified solution")
    return finalize_report(problem, K, out, probes=options.probes, cert_tol=options.cert_tol,
                           grad_tol=options.grad_tol, seed=options.probe_seed)


def _is_new(rep, found, radius) -> bool:
    return all(np.max(np.abs(rep.u - f.u)) > radius for f in found)


def _distinct(cands, radius) -> list[SolveReport]:
    out: list[SolveReport] = []
    for rep in sorted(cands, key=_order_key):
        if _is_new(rep, out, radius):
            out.append(rep)
    return out
