import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from concave_convex.thresholds import (
    TANGENT_RTOL,
    PowerParams,
    admissible_radii,
    admissible_radii_2d,
    h_power,
    lambda_critical,
    lambda_critical_2d,
    stationary_radius,
)


def closed_form_lambda0(p, q, V0):
    # min_r r^a + lam r^-b = V0 at the stationary point gives lam = (a/b) (V0 b/(a+b))^((a+b)/a)
    a, b = p - 2.0, 2.0 - q
    return (a / b) * (V0 * b / (a + b)) ** ((a + b) / a)


exponents = st.tuples(st.floats(2.1, 12.0), st.floats(1.05, 1.95), st.floats(0.05, 20.0))


def test_lambda0_p4():
    assert lambda_critical(4.0, 1.5, 1.0) == pytest.approx(4 * 0.2**1.25, rel=1e-13)
    assert lambda_critical(4.0, 1.5, 1.0) == pytest.approx(0.5349922439811376, rel=1e-13)


@given(exponents)
def test_lambda0_matches_closed_form(pqv):
    p, q, V0 = pqv
    assert lambda_critical(p, q, V0) == pytest.approx(closed_form_lambda0(p, q, V0), rel=1e-12)


@given(exponents, st.floats(0.01, 0.99))
def test_interval_below_threshold(pqv, frac):
    p, q, V0 = pqv
    lam = frac * lambda_critical(p, q, V0)
    res = admissible_radii(PowerParams(p, q, lam, V0))
    assert res.regime == "interval"
    assert 0 < res.r1 < res.r_star < res.r2
    assert res.defect <= 1e-10 * max(1.0, V0)
    assert res.r_star == pytest.approx(stationary_radius(p - 2, q, lam), rel=1e-14)
    # inside the interval the inequality holds, just outside it fails
    mid = math.sqrt(res.r1 * res.r2)
    assert h_power(mid, p - 2, q, lam) <= V0
    assert h_power(0.99 * res.r1, p - 2, q, lam) > V0
    assert h_power(1.01 * res.r2, p - 2, q, lam) > V0


@given(exponents, st.floats(1.001, 10.0))
def test_empty_above_threshold(pqv, frac):
    p, q, V0 = pqv
    res = admissible_radii(PowerParams(p, q, frac * lambda_critical(p, q, V0), V0))
    assert res.regime == "empty"
    assert not res.nonempty
    assert math.isnan(res.radius)


@given(exponents)
def test_tangent_at_threshold(pqv):
    p, q, V0 = pqv
    lam0 = lambda_critical(p, q, V0)
    res = admissible_radii(PowerParams(p, q, lam0, V0))
    assert res.regime == "tangent"
    assert res.r1 == res.r2 == res.r_star
    assert res.radius == res.r_star
    assert abs(h_power(res.r_star, p - 2, q, lam0) - V0) <= TANGENT_RTOL * V0


@given(exponents, st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_interval_nested_in_lambda(pqv, f1, f2):
    p, q, V0 = pqv
    assume(abs(f1 - f2) > 1e-6)
    lo, hi = sorted((f1, f2))
    lam0 = lambda_critical(p, q, V0)
    a = admissible_radii(PowerParams(p, q, lo * lam0, V0))
    b = admissible_radii(PowerParams(p, q, hi * lam0, V0))
    assert a.r1 <= b.r1 and b.r2 <= a.r2


def test_reference_3d_radii():
    lam0 = lambda_critical(8.0, 1.5, 1.0)
    assert lam0 == pytest.approx(0.745434, abs=1e-6)
    res = admissible_radii(PowerParams(8.0, 1.5, lam0 / 2, 1.0))
    assert res.r1 == pytest.approx(0.13892, abs=1e-5)
    assert res.r2 == pytest.approx(0.92135, abs=1e-5)


@pytest.mark.parametrize("p,q,V0,lam", [(2.0, 1.5, 1.0, 0.1), (4.0, 1.0, 1.0, 0.1), (4.0, 2.0, 1.0, 0.1),
                                        (4.0, 1.5, 0.0, 0.1), (4.0, 1.5, 1.0, 0.0)])
def test_invalid_params(p, q, V0, lam):
    with pytest.raises(ValueError):
        PowerParams(p, q, lam, V0)


def test_lambda1_uncapped_equals_lambda0():
    # nu plays the role of p - 1
    assert lambda_critical_2d(3.0, 1.5, 1.0) == pytest.approx(lambda_critical(4.0, 1.5, 1.0), rel=1e-14)


def test_lambda1_reference_exponential():
    assert lambda_critical_2d(2.0, 1.5, 1.0, 0.6529186403675666) == pytest.approx(0.3849002, abs=1e-7)


def test_radii_2d_capped_below_delta1():
    delta1 = 0.6529186403675666
    lam1 = lambda_critical_2d(2.0, 1.5, 1.0, delta1)
    res = admissible_radii_2d(2.0, 1.5, 1.0, delta1, 0.5 * lam1)
    assert res.regime == "interval"
    assert res.r2 < delta1
    assert "delta1_capped" in res.flags
    assert h_power(res.r2, 1.0, 1.5, 0.5 * lam1) <= 1.0


def test_radii_2d_empty_above_lambda1():
    delta1 = 0.6529186403675666
    lam1 = lambda_critical_2d(2.0, 1.5, 1.0, delta1)
    res = admissible_radii_2d(2.0, 1.5, 1.0, delta1, 2 * lam1)
    assert not res.nonempty


@given(st.floats(1.1, 4.0), st.floats(1.05, 1.95), st.floats(0.2, 5.0), st.floats(0.05, 3.0))
def test_lambda1_is_the_boundary(nu, q, V0, delta1):
    lam1 = lambda_critical_2d(nu, q, V0, delta1)
    assume(lam1 > 1e-12)
    inside = admissible_radii_2d(nu, q, V0, delta1, 0.95 * lam1)
    outside = admissible_radii_2d(nu, q, V0, delta1, 1.05 * lam1)
    assert inside.nonempty
    assert not outside.nonempty
    assert inside.radius < delta1


def test_trichotomy_scan():
    rng = np.random.default_rng(11)
    r = np.logspace(-8, 4, 100_001)
    for _ in range(300):
        p, q, V0 = rng.uniform(2.1, 10), rng.uniform(1.05, 1.95), rng.uniform(0.1, 10)
        lam = lambda_critical(p, q, V0) * rng.uniform(0.01, 2)
        res = admissible_radii(PowerParams(p, q, lam, V0))
        inside = h_power(r, p - 2, q, lam) <= V0
        if res.regime == "empty":
            assert not inside.any()
        elif res.regime == "interval":
            np.testing.assert_array_equal(inside, (r >= res.r1) & (r <= res.r2))
