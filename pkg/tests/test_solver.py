import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concave_convex.energy import NonlinearitySpec, ProblemParams
from concave_convex.grid import GridSpec
from concave_convex.reference import tiny_1d
from concave_convex.schrodinger_op import PotentialSpec, ev_norm
from concave_convex.solver import (
    ConvexSet,
    Deflation,
    certify_invariance,
    default_seed,
    fixed_point_iterate,
    kkt_residual,
    minimize_IK,
    pde_residual,
    power_problem,
    project,
    stationarity_check,
    symmetrize,
    warn_outside_threshold,
)
from concave_convex.thresholds import PowerParams, admissible_radii, lambda_critical


def small_problem(dim=1, m=21, L=4.0, fraction=0.5):
    p, q = 4.0, 1.5
    lam = fraction * lambda_critical(p, q, 1.0)
    params = ProblemParams(GridSpec(dim, L, m), PotentialSpec.radial_power(dim + 1.0), NonlinearitySpec.power(p), q,
                           lam)
    r2 = admissible_radii(PowerParams(p, q, lam, 1.0)).r2
    return power_problem(params), r2


@pytest.fixture(scope="module")
def solved_1d():
    problem, r2 = small_problem()
    K = ConvexSet.positive_cone(r2)
    return problem, K, minimize_IK(problem, K)


def test_convex_set():
    K = ConvexSet.symmetric(2.0)
    assert K.radius == 2.0
    assert K.contains(np.array([-2.0, 0.0, 2.0]))
    assert not K.contains(np.array([2.1]))
    np.testing.assert_array_equal(project(np.array([-3.0, 0.5, 3.0]), K), [-2.0, 0.5, 2.0])
    np.testing.assert_array_equal(project(np.array([-1.0, 0.5, 3.0]), ConvexSet.positive_cone(1.0)), [0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        ConvexSet(1.0, 0.0)


@given(st.integers(0, 2**31 - 1))
def test_projection_nonexpansive(seed):
    rng = np.random.default_rng(seed)
    K = ConvexSet.symmetric(0.7)
    u, v = rng.standard_normal((2, 30))
    assert np.linalg.norm(project(u, K) - project(v, K)) <= np.linalg.norm(u - v) + 1e-15
    np.testing.assert_array_equal(project(project(u, K), K), project(u, K))


def test_symmetrize_parity():
    problem, _ = small_problem(dim=2, m=9)
    grid = problem.grid
    u = np.random.default_rng(0).standard_normal(grid.size)
    even = symmetrize(u, grid, (1, 1))
    odd_x = symmetrize(u, grid, (-1, 1))
    np.testing.assert_allclose(even[grid.reflection_index(0)], even)
    np.testing.assert_allclose(odd_x[grid.reflection_index(0)], -odd_x)
    np.testing.assert_allclose(odd_x[grid.reflection_index(1)], odd_x)
    np.testing.assert_array_equal(symmetrize(u, grid, None), u)


def test_default_seed_negative_energy():
    problem, r2 = small_problem()
    K = ConvexSet.positive_cone(r2)
    seed = default_seed(problem, K)
    assert K.contains(seed)
    assert problem.energy(seed) < 0


def test_minimizer_certified(solved_1d):
    problem, K, rep = solved_1d
    assert rep.converged and rep.certified
    assert rep.energy < 0
    assert rep.kkt_residual <= 1e-10
    assert rep.u.min() > 0
    assert rep.sup_norm < K.radius
    assert rep.stationarity_margin >= -1e-12
    assert rep.invariance.fixed_point_gap <= 1e-6 * ev_norm(problem.op, rep.u)
    assert rep.pde_residual == pytest.approx(pde_residual(problem, rep.u))


def test_energy_monotone(solved_1d):
    _, _, rep = solved_1d
    energies = np.array([h[1] for h in rep.history])
    assert np.all(np.diff(energies) <= 1e-14 * np.maximum(1.0, np.abs(energies[1:])))


def test_kkt_zero_only_at_critical_points(solved_1d):
    problem, K, rep = solved_1d
    assert kkt_residual(problem, rep.u, K) <= 1e-10
    assert kkt_residual(problem, 0.5 * rep.u, K) > 1e-6


def test_stationarity_negative_away_from_critical(solved_1d):
    problem, K, rep = solved_1d
    assert stationarity_check(problem, K, rep.u, probes=1000) >= -1e-12
    assert stationarity_check(problem, K, 0.5 * rep.u, probes=1000) < 0
    with pytest.raises(ValueError):
        stationarity_check(problem, K, np.full(problem.grid.size, 2 * K.radius))


def test_invariance_on_random_points():
    problem, r2 = small_problem()
    K = ConvexSet.positive_cone(r2)
    rng = np.random.default_rng(4)
    for _ in range(30):
        rep = certify_invariance(problem, rng.uniform(0, r2, problem.grid.size), r2, K=K)
        assert rep.box_ok and rep.bound_ok and rep.nonneg_ok


def test_invariance_can_fail_outside_threshold():
    # far above the admissible radius the map leaves the box
    problem, r2 = small_problem()
    big = 20 * r2
    rep = certify_invariance(problem, np.full(problem.grid.size, big), big)
    assert not rep.box_ok


def test_fixed_point_iteration_agrees(solved_1d):
    problem, K, rep = solved_1d
    fp = fixed_point_iterate(problem, 1.01 * rep.u, K.radius, max_iter=300)
    assert fp.history[0][0] == 1
    assert fp.converged
    np.testing.assert_allclose(fp.u, rep.u, atol=1e-8 * rep.sup_norm)


def test_solution_independent_of_seed():
    problem, r2 = small_problem()
    K = ConvexSet.positive_cone(r2)
    rng = np.random.default_rng(5)
    a = minimize_IK(problem, K)
    b = minimize_IK(problem, K, seed=default_seed(problem, K, direction=rng.uniform(0.5, 1.0, problem.grid.size)))
    np.testing.assert_allclose(a.u, b.u, atol=1e-8 * a.sup_norm)


def test_tiny_grid_against_fine_scan():
    # N=1, m=5: compare with a coordinate-grid scan of the 5-dimensional box
    params = tiny_1d()
    problem = power_problem(params)
    r2 = admissible_radii(PowerParams(params.p, params.q, params.lam, params.V0)).r2
    rep = minimize_IK(problem, ConvexSet.positive_cone(r2))
    rng = np.random.default_rng(0)
    samples = rng.uniform(0, r2, (20000, 5))
    best = min(problem.energy(s) for s in samples)
    assert rep.energy <= best


@settings(max_examples=20)
@given(st.integers(0, 2**31 - 1))
def test_deflation_gradient(seed):
    problem, r2 = small_problem(m=11)
    rng = np.random.default_rng(seed)
    known = [rng.uniform(0, 0.1, problem.grid.size)]
    defl = Deflation(problem.op, known, radius=1.0, weight=1.0)
    u = known[0] + 0.01 * rng.standard_normal(problem.grid.size)
    w = rng.standard_normal(problem.grid.size)
    eps = 1e-7
    fd = (defl.penalty(u + eps * w) - defl.penalty(u - eps * w)) / (2 * eps)
    an = problem.grid.cell_volume * defl.penalty_grad(u) @ w
    assert fd == pytest.approx(an, rel=1e-5)


def test_deflation_vanishes_far_away():
    problem, _ = small_problem(m=11)
    defl = Deflation(problem.op, [np.zeros(problem.grid.size)], radius=1e-3, weight=1.0)
    u = np.full(problem.grid.size, 0.5)
    assert defl.penalty(u) == 0.0
    np.testing.assert_array_equal(defl.penalty_grad(u), 0.0)


def test_warn_outside_threshold():
    with pytest.warns(RuntimeWarning):
        warn_outside_threshold(1.0, 0.5)
