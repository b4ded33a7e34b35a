"""Energy functionals and their nodal gradients.

All integrals use the grid's nodal rectangle rule, and the duality pairing
between a nodal gradient ``G`` and a direction ``w`` is ``h^N * G @ w``.
With that convention the derivative of the quadratic part is exactly
``A u`` (see :mod:`schrodinger_op`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .grid import Grid, GridSpec, check_field, integrate
from .schrodinger_op import PotentialSpec, SchrodingerOperator, ev_norm

__all__ = [
    "NonlinearitySpec",
    "TruncatedNonlinearity",
    "ProblemParams",
    "signed_power",
    "phi",
    "psi",
    "energy_I",
    "grad_phi",
    "grad_phi_bound",
    "detect_delta1",
    "upsilon",
    "grad_upsilon",
    "upsilon_bound",
    "energy_J",
    "T_MAX_DEFAULT",
]

T_MAX_DEFAULT = 10.0


def signed_power(t, e: float) -> np.ndarray:
    """t |t|^(e-1), with value 0 at t = 0 (continuous for e > 0)."""
    t = np.asarray(t, dtype=float)
    return np.sign(t) * np.abs(t) ** e


@dataclass(frozen=True, eq=False)
class NonlinearitySpec:
    """Odd nonlinearity f with f(t) >= 0 for t >= 0.

    kinds:
      * ``power``: f(t) = t |t|^(p-2)
      * ``odd_exp``: f(t) = t^(2 alpha + 1) exp(beta t^2), alpha a positive integer
      * ``tabulated_odd``: piecewise-linear interpolation of samples on t >= 0
    """

    kind: str
    p: float = math.nan
    alpha: int = 0
    beta: float = 0.0
    nu: float = math.nan
    samples: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "power":
            if not self.p > 2:
                raise ValueError(f"power nonlinearity needs p > 2, got {self.p}")
        elif self.kind == "odd_exp":
            if int(self.alpha) != self.alpha or self.alpha < 1:
                raise ValueError(f"alpha must be a positive integer, got {self.alpha}")
            if not self.nu > 1:
                raise ValueError(f"nu must exceed 1, got {self.nu}")
            if not 2 * self.alpha + 1 > self.nu:
                raise ValueError(f"f(t)/t^nu does not vanish at 0: 2*alpha+1={2 * self.alpha + 1} <= nu={self.nu}")
        elif self.kind == "tabulated_odd":
            if self.samples is None:
                raise ValueError("tabulated_odd needs samples")
            t, f = (np.asarray(a, dtype=float) for a in self.samples)
            if t[0] != 0 or f[0] != 0 or np.any(np.diff(t) <= 0) or np.any(f < 0):
                raise ValueError("samples must start at (0, 0), be increasing in t and nonnegative")
            if not self.nu > 1:
                raise ValueError(f"nu must exceed 1, got {self.nu}")
        else:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")

    @classmethod
    def power(cls, p: float, nu: float | None = None) -> "NonlinearitySpec":
        return cls("power", p=p, nu=p - 1.0 if nu is None else nu)

    @classmethod
    def odd_exp(cls, alpha: int, beta: float, nu: float) -> "NonlinearitySpec":
        return cls("odd_exp", alpha=alpha, beta=beta, nu=nu)

    @classmethod
    def tabulated_odd(cls, t, f, nu: float) -> "NonlinearitySpec":
        return cls("tabulated_odd", nu=nu, samples=(np.asarray(t, float), np.asarray(f, float)))

    def f(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            return signed_power(t, self.p - 1.0)
        if self.kind == "odd_exp":
            return t ** (2 * int(self.alpha) + 1) * np.exp(self.beta * t * t)
        ts, fs = self.samples
        return np.sign(t) * np.interp(np.abs(t), ts, fs)

    def primitive(self, t):
        """F(t) = int_0^t f(s) ds (even in t)."""
        a = np.abs(np.asarray(t, dtype=float))
        if self.kind == "power":
            return a**self.p / self.p
        if self.kind == "odd_exp":
            if self.beta == 0:
                k = 2 * int(self.alpha) + 2
                return a**k / k
            return self._odd_exp_table(float(a.max()) if a.size else 0.0)(a)
        ts, fs = self.samples
        # exact integral of the piecewise-linear interpolant
        cum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(ts) * (fs[1:] + fs[:-1]))])
        j = np.clip(np.searchsorted(ts, a, side="right") - 1, 0, len(ts) - 2)
        fa = np.interp(a, ts, fs)
        inside = cum[j] + 0.5 * (a - ts[j]) * (fs[j] + fa)
        # np.interp holds f constant past the last sample
        beyond = cum[-1] + fs[-1] * (a - ts[-1])
        return np.where(a <= ts[-1], inside, beyond)

    def _odd_exp_table(self, upto: float):
        top = max(upto, 1.0)
        cache = self.__dict__.setdefault("_tables", {})
        for key, spline in cache.items():
            if key >= top:
                return spline
        spline = _primitive_table(self.f, top)
        cache[top] = spline
        return spline


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _primitive_table(f, top: float, panels: int = 4096) -> CubicHermiteSpline:
    """Tabulate F(t) = int_0^t f on [0, top]; Hermite interpolation uses f as slope."""
    knots = np.linspace(0.0, top, panels + 1)
    a, b = knots[:-1], knots[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    s = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    pieces = half * (f(s) @ _GL_WEIGHTS)
    values = np.concatenate([[0.0], np.cumsum(pieces)])
    return CubicHermiteSpline(knots, values, f(knots), extrapolate=False)


@dataclass(frozen=True, eq=False)
class TruncatedNonlinearity:
    """g(t) = f(t) for |t| <= r, and (f(r)/r) t beyond."""

    base: NonlinearitySpec
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"truncation level must be positive, got {self.r}")

    @cached_property
    def slope(self) -> float:
        return float(self.base.f(self.r)) / self.r

    @cached_property
    def _F_r(self) -> float:
        return float(self.base.primitive(self.r))

    def g(self, t):
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) <= self.r
        return np.where(inside, self.base.f(np.clip(t, -self.r, self.r)), self.slope * t)

    def G(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        below = self.base.primitive(np.minimum(a, self.r))
        tail = 0.5 * self.slope * (a * a - self.r * self.r)
        return np.where(a <= self.r, below, self._F_r + tail)


@dataclass(frozen=True)
class ProblemParams:
    """Full data of the concave-convex problem on a truncated box."""

    grid: GridSpec
    potential: PotentialSpec
    nonlinearity: NonlinearitySpec
    q: float
    lam: float

    def __post_init__(self):
        if not 1 < self.q < 2:
            raise ValueError(f"need 1 < q < 2, got {self.q}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    @property
    def p(self) -> float:
        if self.nonlinearity.kind != "power":
            raise ValueError("p is only defined for the power nonlinearity")
        return self.nonlinearity.p

    @property
    def V0(self) -> float:
        return self.potential.V0


def _power_params(params: ProblemParams):
    if params.nonlinearity.kind != "power":
        raise ValueError("this functional requires the power nonlinearity")
    return params.nonlinearity.p, params.q, params.lam


def phi(params: ProblemParams, grid: Grid, u) -> float:
    """(1/p) int |u|^p + (lam/q) int |u|^q."""
    p, q, lam = _power_params(params)
    a = np.abs(check_field(grid, u))
    return integrate(grid, a**p / p + (lam / q) * a**q)


def psi(op: SchrodingerOperator, u) -> float:
    return 0.5 * ev_norm(op, u) ** 2


def energy_I(op: SchrodingerOperator, params: ProblemParams, u) -> float:
    return psi(op, u) - phi(params, op.grid, u)


def grad_phi(params: ProblemParams, u) -> np.ndarray:
    """Nodal map t -> t|t|^(p-2) + lam t|t|^(q-2)."""
    p, q, lam = _power_params(params)
    u = np.asarray(u, dtype=float)
    return signed_power(u, p - 1.0) + lam * signed_power(u, q - 1.0)


def grad_phi_bound(params: ProblemParams, r: float) -> float:
    p, q, lam = _power_params(params)
    if r < 0:
        raise ValueError("r must be nonnegative")
    return r ** (p - 1.0) + lam * r ** (q - 1.0)


def detect_delta1(f: NonlinearitySpec, t_max: float = T_MAX_DEFAULT, scan_points: int = 2000) -> float:
    """Largest delta with |f(t)| <= t^nu on (0, delta], up to t_max.

    Scans a logarithmic grid from 1e-12 and bisects the first sign change to
    1e-10. Raises ValueError if the bound already fails at the smallest scale.
    """
    nu = f.nu
    if not nu > 1:
        raise ValueError(f"nu must exceed 1, got {nu}")

    def ok(t):
        return abs(float(f.f(t))) <= t**nu

    ts = np.logspace(-12, math.log10(t_max), scan_points)
    good = np.array([ok(t) for t in ts])
    if not good[0]:
        raise ValueError(f"|f(t)| <= |t|^nu fails already at t=1e-12; nu={nu} is too large for this f")
    if good.all():
        return float(t_max)
    j = int(np.argmin(good))
    lo, hi = float(ts[j - 1]), float(ts[j])
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def upsilon(trunc: TruncatedNonlinearity, q: float, lam: float, grid: Grid, u) -> float:
    """int G(u) + (lam/q) int |u|^q with G the primitive of the truncated g."""
    u = check_field(grid, u)
    return integrate(grid, trunc.G(u) + (lam / q) * np.abs(u) ** q)


def grad_upsilon(trunc: TruncatedNonlinearity, q: float, lam: float, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return trunc.g(u) + lam * signed_power(u, q - 1.0)


def upsilon_bound(nu: float, q: float, lam: float, r: float) -> float:
    """r^nu + lam r^(q-1), the sup-norm bound on grad_upsilon over K(r), r <= delta1."""
    return r**nu + lam * r ** (q - 1.0)


def energy_J(op: SchrodingerOperator, trunc: TruncatedNonlinearity, q: float, lam: float, u) -> float:
    return psi(op, u) - upsilon(trunc, q, lam, op.grid, u)
