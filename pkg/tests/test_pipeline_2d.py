import numpy as np
import pytest

from concave_convex.energy import NonlinearitySpec, ProblemParams
from concave_convex.grid import GridSpec
from concave_convex.pipeline_2d import EmptyAdmissibleSet, solve_truncated
from concave_convex.reference import reference_2d_truncated
from concave_convex.schrodinger_op import PotentialSpec


@pytest.fixture(scope="module")
def solved():
    params = reference_2d_truncated(nodes_per_axis=23)
    return params, solve_truncated(params)


def test_certified_positive(solved):
    params, tr = solved
    assert tr.certified
    assert tr.report.energy < 0
    assert tr.report.u.min() > 0
    assert tr.delta1 == pytest.approx(0.6529186, abs=1e-6)
    assert tr.r < tr.delta1
    assert tr.truncation_inactive


def test_untruncated_residual_small(solved):
    params, tr = solved
    assert tr.untruncated_residual <= 1e-6 * params.V0 * tr.r
    # inside the box g == f, so both residuals agree
    assert tr.untruncated_residual == pytest.approx(tr.report.pde_residual, rel=1e-10)


def test_empty_above_lambda1(solved):
    params, tr = solved
    from dataclasses import replace

    with pytest.raises(EmptyAdmissibleSet, match="delta1"):
        solve_truncated(replace(params, lam=2 * tr.lambda1))


def test_requires_planar():
    params = ProblemParams(GridSpec(1, 2.0, 9), PotentialSpec.radial_power(3.0),
                           NonlinearitySpec.odd_exp(1, 1.0, 2.0), 1.5, 0.01)
    with pytest.raises(ValueError, match="planar"):
        solve_truncated(params)


def test_power_case_matches_direct_solver():
    # f(t) = t^3 with nu = 3: delta1 is the scan cap and the pipeline reduces to the power problem
    from concave_convex.solver import ConvexSet, minimize_IK, power_problem
    from concave_convex.thresholds import PowerParams, admissible_radii, lambda_critical

    lam = 0.3 * lambda_critical(4.0, 1.5, 1.0)
    params = ProblemParams(GridSpec(2, 4.0, 15), PotentialSpec.radial_power(3.0), NonlinearitySpec.power(4.0), 1.5,
                           lam)
    tr = solve_truncated(params)
    r2 = admissible_radii(PowerParams(4.0, 1.5, lam, 1.0)).r2
    rep = minimize_IK(power_problem(params), ConvexSet.positive_cone(r2))
    np.testing.assert_allclose(tr.report.u, rep.u, atol=1e-8 * rep.sup_norm)


def test_cubic_example_certified():
    # f(t) = t^3 declared with nu = 2, lambda = Lambda1 / 2
    from concave_convex.energy import detect_delta1
    from concave_convex.thresholds import lambda_critical_2d

    f = NonlinearitySpec.odd_exp(1, 0.0, 2.0)
    lam1 = lambda_critical_2d(2.0, 1.5, 1.0, detect_delta1(f))
    params = ProblemParams(GridSpec(2, 6.0, 23), PotentialSpec.radial_power(3.0), f, 1.5, 0.5 * lam1)
    tr = solve_truncated(params)
    assert tr.certified and tr.report.energy < 0 and tr.report.u.min() > 0
    # g == f exactly at every node
    from concave_convex.energy import TruncatedNonlinearity

    np.testing.assert_array_equal(TruncatedNonlinearity(f, tr.r).g(tr.report.u), f.f(tr.report.u))
