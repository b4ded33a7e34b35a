"""Reference configurations used by the acceptance suite, the scripts and the CLI defaults."""
from __future__ import annotations

from .energy import NonlinearitySpec, ProblemParams, detect_delta1
from .grid import GridSpec
from .schrodinger_op import PotentialSpec
from .thresholds import lambda_critical, lambda_critical_2d


def reference_3d(half_width: float = 8.0, nodes_per_axis: int = 31, fraction: float = 0.5) -> ProblemParams:
    """N=3, V = 1 + |x|^4, p = 8 (above 2* = 6), q = 1.5, lambda = fraction * Lambda0."""
    p, q = 8.0, 1.5
    pot = PotentialSpec.radial_power(4.0)
    lam = fraction * lambda_critical(p, q, pot.V0)
    return ProblemParams(GridSpec(3, half_width, nodes_per_axis), pot, NonlinearitySpec.power(p), q, lam)


def reference_2d_symmetric(half_width: float = 6.0, nodes_per_axis: int = 47, fraction: float = 0.5) -> ProblemParams:
    """N=2, V = 1 + |x|^3, p = 4, q = 1.5, lambda = fraction * Lambda0; used on [-r2, r2]."""
    p, q = 4.0, 1.5
    pot = PotentialSpec.radial_power(3.0)
    lam = fraction * lambda_critical(p, q, pot.V0)
    return ProblemParams(GridSpec(2, half_width, nodes_per_axis), pot, NonlinearitySpec.power(p), q, lam)


def reference_2d_truncated(half_width: float = 6.0, nodes_per_axis: int = 47, fraction: float = 0.5,
                           beta: float = 1.0) -> ProblemParams:
    """N=2, f(t) = t^3 exp(beta t^2) with nu = 2, V = 1 + |x|^3, q = 1.5, lambda = fraction * Lambda1."""
    q = 1.5
    f = NonlinearitySpec.odd_exp(1, beta, 2.0)
    pot = PotentialSpec.radial_power(3.0)
    lam = fraction * lambda_critical_2d(f.nu, q, pot.V0, detect_delta1(f))
    return ProblemParams(GridSpec(2, half_width, nodes_per_axis), pot, f, q, lam)


def tiny_1d(fraction: float = 0.1) -> ProblemParams:
    """N=1, m=5 grid for brute-force comparison: L = 2, V = 1 + x^4, p = 4, q = 1.5."""
    p, q = 4.0, 1.5
    pot = PotentialSpec.radial_power(4.0)
    lam = fraction * lambda_critical(p, q, pot.V0)
    return ProblemParams(GridSpec(1, 2.0, 5), pot, NonlinearitySpec.power(p), q, lam)
