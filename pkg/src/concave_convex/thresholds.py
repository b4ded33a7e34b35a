"""Scalar threshold analysis for the invariant ball radius.

For the power case the radius r is admissible when

    r^(p-1) + lam * r^(q-1) <= V0 * r   <=>   h(r) = r^(p-2) + lam * r^(q-2) <= V0,

and h is strictly convex on (0, inf) with a single minimum at
r* = (lam (2-q) / (p-2))^(1/(p-q)). The 2-D truncated case replaces p - 2 by
nu - 1 and caps admissible radii by delta1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PowerParams",
    "ThresholdResult",
    "h_power",
    "stationary_radius",
    "lambda_critical",
    "admissible_radii",
    "admissible_radii_2d",
    "lambda_critical_2d",
    "TANGENT_RTOL",
]

TANGENT_RTOL = 1e-10


@dataclass(frozen=True)
class PowerParams:
    p: float
    q: float
    lam: float
    V0: float

    def __post_init__(self):
        _check_exponents(self.p, self.q, self.V0)
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of the radius analysis.

    ``regime`` is ``"interval"`` (r1 < r2), ``"tangent"`` (r1 == r2 == r_star)
    or ``"empty"``. ``defect`` is max |h(r_i) - V0| over the returned endpoints.
    """

    lambda_crit: float
    regime: str
    r1: float = math.nan
    r2: float = math.nan
    r_star: float = math.nan
    defect: float = math.nan
    flags: tuple[str, ...] = ()

    @property
    def nonempty(self) -> bool:
        return self.regime in ("interval", "tangent")

    @property
    def radius(self) -> float:
        """Largest admissible radius, or nan when empty."""
        if self.regime == "interval":
            return self.r2
        if self.regime == "tangent":
            return self.r_star
        return math.nan


def _check_exponents(p, q, V0):
    if not (1 < q < 2 < p):
        raise ValueError(f"need 1 < q < 2 < p, got q={q}, p={p}")
    if not V0 > 0:
        raise ValueError(f"V0 must be positive, got {V0}")


def h_power(r, a: float, q: float, lam: float):
    """h(r) = r^a + lam r^(q-2); a = p-2 (power case) or nu-1 (2-D case)."""
    return r**a + lam * r ** (q - 2.0)


def stationary_radius(a: float, q: float, lam: float) -> float:
    return (lam * (2.0 - q) / a) ** (1.0 / (a + 2.0 - q))


def _min_h(a, q, lam):
    return h_power(stationary_radius(a, q, lam), a, q, lam)


def _lambda_crit(a: float, q: float, V0: float) -> float:
    # min_r h is strictly increasing in lam: bracket, then bisect
    lo, hi = 0.0, 1.0
    while _min_h(a, q, hi) < V0:
        lo, hi = hi, 2.0 * hi
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _min_h(a, q, mid) < V0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def lambda_critical(p: float, q: float, V0: float) -> float:
    """Largest lambda for which some r > 0 satisfies r^(p-1) + lam r^(q-1) <= V0 r."""
    _check_exponents(p, q, V0)
    return _lambda_crit(p - 2.0, q, V0)


def _bisect_root(fun, lo, hi, rtol=1e-15):
    """Root of a function with fun(lo) and fun(hi) of opposite sign."""
    flo = fun(lo)
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= rtol * abs(mid):
            break
        fm = fun(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _radii(a: float, q: float, lam: float, V0: float, lam_crit: float) -> ThresholdResult:
    r_star = stationary_radius(a, q, lam)
    if abs(lam - lam_crit) <= TANGENT_RTOL * lam_crit:
        defect = abs(h_power(r_star, a, q, lam) - V0)
        return ThresholdResult(lam_crit, "tangent", r_star, r_star, r_star, defect)
    if lam > lam_crit:
        return ThresholdResult(lam_crit, "empty", r_star=r_star)

    def f(r):
        return h_power(r, a, q, lam) - V0

    lo = r_star
    while f(lo) < 0:
        lo *= 0.5
    hi = r_star
    while f(hi) < 0:
        hi *= 2.0
    r1 = _bisect_root(f, lo, r_star)
    r2 = _bisect_root(f, r_star, hi)
    defect = max(abs(f(r1)), abs(f(r2)))
    return ThresholdResult(lam_crit, "interval", r1, r2, r_star, defect)


def admissible_radii(params: PowerParams) -> ThresholdResult:
    a = params.p - 2.0
    lam_crit = _lambda_crit(a, params.q, params.V0)
    return _radii(a, params.q, params.lam, params.V0, lam_crit)


def lambda_critical_2d(nu: float, q: float, V0: float, delta1: float = math.inf) -> float:
    """Largest lambda whose admissible radius set [r1, min(r2, delta1)) is nonempty."""
    if not nu > 1:
        raise ValueError(f"nu must exceed 1, got {nu}")
    if not 1 < q < 2:
        raise ValueError(f"need 1 < q < 2, got {q}")
    a = nu - 1.0
    lam0 = _lambda_crit(a, q, V0)
    if math.isinf(delta1) or stationary_radius(a, q, lam0) < delta1:
        return lam0
    # delta1 binds: the largest lambda keeps h(delta1) <= V0, i.e. r1 reaches delta1
    return (V0 - delta1**a) * delta1 ** (2.0 - q) if V0 > delta1**a else 0.0


def admissible_radii_2d(nu: float, q: float, V0: float, delta1: float, lam: float) -> ThresholdResult:
    """Admissible radii for r^nu + lam r^(q-1) <= V0 r with the cap r < delta1."""
    if not nu > 1:
        raise ValueError(f"nu must exceed 1, got {nu}")
    if not 1 < q < 2:
        raise ValueError(f"need 1 < q < 2, got {q}")
    if not V0 > 0 or not delta1 > 0 or not lam > 0:
        raise ValueError("V0, delta1 and lambda must be positive")
    a = nu - 1.0
    lam1 = lambda_critical_2d(nu, q, V0, delta1)
    res = _radii(a, q, lam, V0, _lambda_crit(a, q, V0))
    if not res.nonempty or math.isinf(delta1):
        return ThresholdResult(lam1, res.regime, res.r1, res.r2, res.r_star, res.defect, res.flags)
    if res.r1 >= delta1:
        return ThresholdResult(lam1, "empty", r_star=res.r_star, flags=("delta1_binding",))
    if res.r2 >= delta1:
        # strictly below delta1 so the truncated nonlinearity is dominated by r^nu
        r2 = math.nextafter(delta1, 0.0)
        defect = abs(h_power(res.r1, a, q, lam) - V0)
        return ThresholdResult(lam1, "interval", res.r1, r2, res.r_star, defect, ("delta1_capped",))
    return ThresholdResult(lam1, res.regime, res.r1, res.r2, res.r_star, res.defect, res.flags)
