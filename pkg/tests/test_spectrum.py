import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concave_convex.grid import GridSpec, build_grid
from concave_convex.reference import reference_2d_symmetric
from concave_convex.schrodinger_op import PotentialSpec, assemble
from concave_convex.solver import power_problem
from concave_convex.spectrum import eigenpairs, sphere_directions, sup_norm_constant, verify_ck_negative
from concave_convex.thresholds import PowerParams, admissible_radii


def box_op(dim, m, L=2.0, c=1.0):
    return assemble(build_grid(GridSpec(dim, L, m)), PotentialSpec.constant(c))


def discrete_box_eigenvalues(m, L, c=1.0):
    # exact spectrum of the 1-D three-point Laplacian with Dirichlet ends
    h = 2 * L / (m + 1)
    j = np.arange(1, m + 1)
    return c + (4 / h**2) * np.sin(j * math.pi / (2 * (m + 1))) ** 2


def test_matches_discrete_closed_form_1d():
    op = box_op(1, 41)
    pairs = eigenpairs(op, 6)
    np.testing.assert_allclose(pairs.values, discrete_box_eigenvalues(41, 2.0)[:6], rtol=1e-12)


def test_matches_discrete_closed_form_2d():
    op = box_op(2, 21)
    lam1 = discrete_box_eigenvalues(21, 2.0, 0.0)
    expect = np.sort((lam1[:, None] + lam1[None, :]).ravel())[:5] + 1.0
    np.testing.assert_allclose(eigenpairs(op, 5).values, expect, rtol=1e-11)


def test_ev_orthonormal_with_degenerate_pairs():
    op = box_op(2, 21)
    pairs = eigenpairs(op, 5)
    E = pairs.fields
    G = op.grid.cell_volume * E.T @ (op.matrix @ E)
    assert np.max(np.abs(G - np.eye(5))) <= 1e-8


def test_sign_convention_and_bounds():
    op = assemble(build_grid(GridSpec(2, 3.0, 15)), PotentialSpec.radial_power(3.0))
    pairs = eigenpairs(op, 3)
    assert pairs.values[0] >= op.V0
    assert np.all(np.diff(pairs.values) >= -1e-12)
    for j in range(3):
        e = pairs.field(j)
        assert e[np.argmax(np.abs(e))] > 0
    # ground state has one sign
    assert pairs.field(0).min() > -1e-12


def test_k_out_of_range():
    with pytest.raises(ValueError):
        eigenpairs(box_op(1, 5), 5)


@given(st.integers(1, 5), st.integers(2, 64))
def test_sphere_directions_unit_and_nested(k, samples):
    d = sphere_directions(k, samples, seed=0)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0, rtol=1e-12)
    if k > 1:
        lower = sphere_directions(k - 1, samples, seed=0)
        np.testing.assert_array_equal(d[: len(lower), :-1], lower)


def test_sup_norm_constant():
    op = box_op(1, 21)
    pairs = eigenpairs(op, 3)
    C = sup_norm_constant(pairs, 2)
    rng = np.random.default_rng(0)
    for a in rng.standard_normal((200, 2)):
        a /= np.linalg.norm(a)
        assert np.max(np.abs(pairs.fields[:, :2] @ a)) <= C + 1e-12


@pytest.fixture(scope="module")
def sym2d():
    params = reference_2d_symmetric(nodes_per_axis=23)
    problem = power_problem(params)
    r2 = admissible_radii(PowerParams(params.p, params.q, params.lam, params.V0)).r2
    return problem, eigenpairs(problem.op, 4), r2


def test_ck_negative_small_rho(sym2d):
    problem, pairs, r2 = sym2d
    for k in range(1, 5):
        rep = verify_ck_negative(problem.energy, pairs, k, np.logspace(-4, -1, 13), r_max=r2)
        assert rep.negative and rep.sphere_sup < 0
        assert rep.C * rep.rho <= r2


def test_ck_sup_monotone_in_k(sym2d):
    problem, pairs, r2 = sym2d
    sups = [verify_ck_negative(problem.energy, pairs, k, [0.01], r_max=r2).sphere_sup for k in range(1, 5)]
    assert all(a <= b + 1e-15 for a, b in zip(sups, sups[1:]))


def test_ck_rejects_impossible_radius(sym2d):
    problem, pairs, _ = sym2d
    with pytest.raises(ValueError, match="r_max"):
        verify_ck_negative(problem.energy, pairs, 2, [10.0], r_max=1e-3)
