"""Low eigenpairs of the Schrodinger operator and the negative-sphere witness."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla
from scipy.special import ndtri
from scipy.stats import qmc

from .schrodinger_op import SchrodingerOperator, solve_linear

__all__ = ["EigenPairs", "CkReport", "eigenpairs", "sup_norm_constant", "sphere_directions", "verify_ck_negative"]

DIRECT_LIMIT = 40_000


@dataclass(frozen=True, eq=False)
class EigenPairs:
    """Smallest eigenvalues with E_V-orthonormal eigenfields (columns of ``fields``)."""

    values: np.ndarray
    fields: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.values)

    def field(self, j: int) -> np.ndarray:
        return self.fields[:, j]


def eigenpairs(op: SchrodingerOperator, k: int, tol: float = 1e-8) -> EigenPairs:
    """Smallest k eigenpairs via shift-invert Lanczos around 0.

    The inverse is a sparse LU for moderate sizes and an inner CG solve beyond
    that. Eigenfields are rescaled so that h^N e_i^T A e_j = delta_ij, and the
    sign is fixed so the largest-magnitude entry is positive.
    """
    n = op.size
    if not 1 <= k < n - 1:
        raise ValueError(f"need 1 <= k < {n - 1}, got {k}")
    if n <= DIRECT_LIMIT:
        lu = op._lu
        OPinv = spla.LinearOperator((n, n), matvec=lu.solve, dtype=float)
    else:
        OPinv = spla.LinearOperator((n, n), matvec=lambda x: solve_linear(op, x, rel_tol=1e-13), dtype=float)
    v0 = np.ones(n)
    vals, vecs = spla.eigsh(op.matrix, k=k, sigma=0.0, which="LM", OPinv=OPinv, v0=v0, tol=1e-14,
                            maxiter=max(1000, 50 * k))
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    hN = op.grid.cell_volume
    out = np.empty_like(vecs)
    res = np.empty(k)
    for j in range(k):
        e = vecs[:, j]
        e = e / math.sqrt(hN * (e @ (op.matrix @ e)))
        if e[np.argmax(np.abs(e))] < 0:
            e = -e
        out[:, j] = e
    # clusters of equal eigenvalues come back only L2-orthogonal to rounding; re-orthonormalize in E_V
    G = hN * out.T @ (op.matrix @ out)
    if np.max(np.abs(G - np.eye(k))) > 1e-12:
        L = np.linalg.cholesky(G)
        out = np.linalg.solve(L, out.T).T
    for j in range(k):
        e = out[:, j]
        res[j] = np.linalg.norm(op.matrix @ e - vals[j] * e) / np.linalg.norm(e)
    if np.any(res > tol * np.maximum(vals, 1.0)):
        raise RuntimeError(f"eigen-residuals {res} exceed {tol} * mu")
    return EigenPairs(values=vals, fields=out, residuals=res)


def sup_norm_constant(pairs: EigenPairs, k: int) -> float:
    """C = max |sum a_i e_i|_inf over unit alpha; equals max_x |(e_1(x),...,e_k(x))|_2."""
    E = pairs.fields[:, :k]
    return float(np.sqrt(np.max(np.sum(E * E, axis=1))))


def sphere_directions(k: int, samples: int, seed: int = 0) -> np.ndarray:
    """Unit vectors in R^k: axis points, embedded lower-dimensional sets, then Sobol directions.

    The set for k contains the set for k-1 (padded with a zero), so sampled
    sphere maxima are monotone in k.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return np.array([[1.0], [-1.0]])
    lower = sphere_directions(k - 1, samples, seed)
    lower = np.hstack([lower, np.zeros((len(lower), 1))])
    axis = np.zeros((2, k))
    axis[0, -1], axis[1, -1] = 1.0, -1.0
    sob = qmc.Sobol(d=k, scramble=True, seed=seed + k)
    n = max(samples, 2 * k)
    pts = sob.random(1 << int(math.ceil(math.log2(n))))[:n]
    z = ndtri(np.clip(pts, 1e-12, 1 - 1e-12))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return np.vstack([lower, axis, z])


@dataclass(frozen=True)
class CkReport:
    k: int
    rho: float
    sphere_sup: float
    negative: bool
    C: float = math.nan
    scanned: tuple = ()


def verify_ck_negative(energy, pairs: EigenPairs, k: int, rho_grid, samples: int = 256, r_max: float = math.inf,
                       seed: int = 0) -> CkReport:
    """Sampled upper bound on the minimax level c_k from the sphere in span(e_1..e_k).

    ``energy`` maps a field to its energy. Radii with C * rho > r_max are
    skipped since the sphere would leave the constraint set.
    """
    if len(pairs) < k:
        raise ValueError(f"need at least {k} eigenpairs, have {len(pairs)}")
    if samples < 2 * k:
        raise ValueError(f"need samples >= 2k = {2 * k}")
    C = sup_norm_constant(pairs, k)
    dirs = sphere_directions(k, samples, seed)
    E = pairs.fields[:, :k]
    best = None
    scanned = []
    for rho in sorted(float(x) for x in rho_grid):
        if C * rho > r_max:
            continue
        sup = max(energy(E @ (rho * a)) for a in dirs)
        scanned.append((rho, sup))
        if best is None or sup < best[1]:
            best = (rho, sup)
    if best is None:
        raise ValueError(f"every rho violates C*rho <= r_max (C={C:.4g}, r_max={r_max:.4g})")
    return CkReport(k=k, rho=best[0], sphere_sup=best[1], negative=best[1] < 0, C=C, scanned=tuple(scanned))
