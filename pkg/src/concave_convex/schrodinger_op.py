"""Finite-difference discretization of -Laplace + V(x) with Dirichlet boundary.

The (2N+1)-point stencil gives a symmetric M-matrix whose row sums are at
least V(node) >= V0, so the discrete maximum principle
``V0 * |v|_inf <= |A v|_inf`` holds exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid, check_field

__all__ = [
    "PotentialSpec",
    "SchrodingerOperator",
    "LinearSolveError",
    "MaxPrincipleReport",
    "assemble",
    "apply",
    "solve_linear",
    "max_principle_bound",
    "ev_norm",
    "ev_inner",
    "export_coo",
]

POTENTIAL_KINDS = ("constant", "radial_power", "anisotropic_remark", "tabulated")


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """Potential V(x) together with a certified lower bound V0.

    kinds:
      * ``constant``: V = value
      * ``radial_power``: V = base + |x|^s (s > N required)
      * ``anisotropic_remark``: V = 1 + x1^2 (sin^2(2 pi x1) + x2^2 + ... + xN^2)^alpha
      * ``tabulated``: one value per grid node
    """

    kind: str
    V0: float
    value: float = 1.0
    base: float = 1.0
    s: float = 0.0
    alpha: float = 0.0
    values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if not self.V0 > 0:
            raise ValueError(f"V0 must be positive, got {self.V0}")
        if self.kind == "tabulated" and self.values is None:
            raise ValueError("tabulated potential needs values")

    @classmethod
    def constant(cls, value: float, V0: float | None = None) -> "PotentialSpec":
        return cls("constant", V0=value if V0 is None else V0, value=value)

    @classmethod
    def radial_power(cls, s: float, base: float = 1.0, V0: float | None = None) -> "PotentialSpec":
        return cls("radial_power", V0=base if V0 is None else V0, base=base, s=s)

    @classmethod
    def anisotropic(cls, alpha: float, V0: float = 1.0) -> "PotentialSpec":
        return cls("anisotropic_remark", V0=V0, alpha=alpha)

    @classmethod
    def tabulated(cls, values, V0: float) -> "PotentialSpec":
        return cls("tabulated", V0=V0, values=np.asarray(values, dtype=float))

    def check_integrability(self, dim: int) -> None:
        """Symbolic 1/V in L^1 check for the parametric kinds."""
        if self.kind == "radial_power" and not self.s > dim:
            raise ValueError(f"radial_power needs s > N for 1/V integrable (s={self.s}, N={dim})")
        if self.kind == "anisotropic_remark" and not self.alpha > dim:
            raise ValueError(f"anisotropic potential needs alpha > N (alpha={self.alpha}, N={dim})")

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        x = np.asarray(coords, dtype=float)
        n = x.shape[0]
        if self.kind == "constant":
            return np.full(n, float(self.value))
        if self.kind == "radial_power":
            r = np.sqrt(np.sum(x * x, axis=1))
            return self.base + r**self.s
        if self.kind == "anisotropic_remark":
            x1 = x[:, 0]
            inner = np.sin(2 * np.pi * x1) ** 2 + np.sum(x[:, 1:] ** 2, axis=1)
            return 1.0 + x1**2 * inner**self.alpha
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.shape[0] != n:
            raise ValueError(f"tabulated potential has {vals.shape[0]} values for {n} nodes")
        return vals.copy()

    def is_reflection_symmetric(self, grid: Grid, axis: int) -> bool:
        V = self.evaluate(grid.coords)
        return bool(np.array_equal(V, V[grid.reflection_index(axis)]))


def inverse_volume_proxy(potential: PotentialSpec, grid: Grid) -> float:
    """sum h^N / V(node), the finite stand-in for the integral of 1/V."""
    V = potential.evaluate(grid.coords)
    return float(grid.cell_volume * np.sum(1.0 / V))


class LinearSolveError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SchrodingerOperator:
    grid: Grid
    matrix: sp.csr_matrix = field(repr=False)
    V: np.ndarray = field(repr=False)
    V0: float

    @property
    def size(self) -> int:
        return self.grid.size

    @cached_property
    def diagonal(self) -> np.ndarray:
        d = self.matrix.diagonal()
        d.setflags(write=False)
        return d

    @cached_property
    def _lu(self):
        return spla.splu(self.matrix.tocsc())

    def __matmul__(self, u):
        return self.matrix @ u


def _second_difference(m: int, h: float) -> sp.csr_matrix:
    c = 1.0 / (h * h)
    return sp.diags([-c * np.ones(m - 1), 2 * c * np.ones(m), -c * np.ones(m - 1)], [-1, 0, 1], format="csr")


def assemble(grid: Grid, potential: PotentialSpec) -> SchrodingerOperator:
    """Sparse matrix of -Laplace + V on the interior nodes of ``grid``."""
    potential.check_integrability(grid.dim)
    V = potential.evaluate(grid.coords)
    if np.any(np.isnan(V)):
        raise ValueError("potential evaluates to NaN at some node")
    low = float(V.min())
    if low < potential.V0:
        raise ValueError(f"potential drops to {low} below the declared V0={potential.V0}")
    m, N = grid.m, grid.dim
    T = _second_difference(m, grid.h)
    eye = sp.identity(m, format="csr")
    lap = sp.csr_matrix((grid.size, grid.size))
    for ax in range(N):
        factors = [eye] * N
        factors[ax] = T
        term = factors[0]
        for f in factors[1:]:
            term = sp.kron(term, f, format="csr")
        lap = lap + term
    A = (lap + sp.diags(V)).tocsr()
    A.sort_indices()
    A.eliminate_zeros()
    V.setflags(write=False)
    return SchrodingerOperator(grid=grid, matrix=A, V=V, V0=float(potential.V0))


def apply(op: SchrodingerOperator, u) -> np.ndarray:
    u = check_field(op.grid, u)
    return op.matrix @ u


def solve_linear(op: SchrodingerOperator, g, rel_tol: float = 1e-10, max_iter: int | None = None) -> np.ndarray:
    """Solve A v = g by Jacobi-preconditioned conjugate gradients.

    Guarantees ``|A v - g|_2 <= rel_tol |g|_2`` or raises LinearSolveError.
    """
    if not 0 < rel_tol < 1:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    g = check_field(op.grid, g)
    gnorm = np.linalg.norm(g)
    if gnorm == 0:
        return np.zeros_like(g)
    if max_iter is None:
        max_iter = 20 * op.size + 100
    dinv = 1.0 / op.diagonal
    M = spla.LinearOperator(op.matrix.shape, matvec=lambda x: dinv * x, dtype=float)
    # scipy's stopping test is on the unpreconditioned residual
    v, info = spla.cg(op.matrix, g, rtol=rel_tol, atol=0.0, maxiter=max_iter, M=M, x0=dinv * g)
    res = np.linalg.norm(op.matrix @ v - g)
    if res > rel_tol * gnorm:
        # one refinement sweep recovers from rounding in the recursive residual
        dv, info = spla.cg(op.matrix, g - op.matrix @ v, rtol=0.5 * rel_tol * gnorm / res, atol=0.0,
                           maxiter=max_iter, M=M)
        v = v + dv
        res = np.linalg.norm(op.matrix @ v - g)
    if res > rel_tol * gnorm:
        cond = float(op.diagonal.max() / op.V0)
        raise LinearSolveError(
            f"CG stalled at relative residual {res / gnorm:.3e} (info={info}); condition estimate {cond:.3e}"
        )
    return v


def solve_dense(op: SchrodingerOperator, g) -> np.ndarray:
    """Direct sparse LU solve; used for tiny grids and exact checks."""
    g = check_field(op.grid, g)
    return op._lu.solve(g)


@dataclass(frozen=True)
class MaxPrincipleReport:
    lhs: float
    rhs: float
    slack: float
    holds: bool


def max_principle_bound(op: SchrodingerOperator, g, v, slack: float | None = None) -> MaxPrincipleReport:
    """Check V0 |v|_inf <= |g|_inf + slack for an approximate solution of A v = g.

    By default the slack is the actual sup-norm residual |A v - g|_inf, which is
    exactly what the bound |A^{-1}|_inf <= 1/V0 allows for an inexact solve.
    """
    g = check_field(op.grid, g)
    v = check_field(op.grid, v)
    if slack is None:
        slack = float(np.max(np.abs(op.matrix @ v - g))) if v.size else 0.0
    lhs = op.V0 * float(np.max(np.abs(v)))
    rhs = float(np.max(np.abs(g)))
    return MaxPrincipleReport(lhs=lhs, rhs=rhs, slack=slack, holds=lhs <= rhs + slack)


def ev_inner(op: SchrodingerOperator, u, w) -> float:
    u = check_field(op.grid, u)
    w = check_field(op.grid, w)
    return float(op.grid.cell_volume * (u @ (op.matrix @ w)))


def ev_norm(op: SchrodingerOperator, u) -> float:
    """Discrete E_V norm sqrt(h^N u^T A u)."""
    return math.sqrt(max(ev_inner(op, u, u), 0.0))


def export_coo(op: SchrodingerOperator, path) -> None:
    """Write the matrix as ``row col value`` lines with 0-based indices."""
    A = op.matrix.tocoo()
    order = np.lexsort((A.col, A.row))
    with open(path, "w", encoding="ascii") as fh:
        for k in order:
            fh.write(f"{A.row[k]} {A.col[k]} {float(A.data[k])!r}\n")
