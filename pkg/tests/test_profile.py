import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastdiff.errors import OutOfRange
from fastdiff.params import Params, beta0, derive, m_upper
from fastdiff.profile import (check_envelope, expansion_residuals, fitted_origin_slope,
                              integrate_profile, ode_residual, taylor_init)

# regression values frozen from the tol = 1e-12 integration
FROZEN = [
    (Params(3, 0.0, 1.0, 1.0, 1.0), [2.245604113187571, 3.353750056354124, 5.473995620041474],
     [17.964832905500568, 3.353750056354124, 0.6842494525051842]),
    (Params(5, 0.2, 1.0, 1.0, 2.0), [4.379324436216729, 9.107289228792176, 19.96045851718981],
     [58.920931514362266, 9.107289228792176, 1.483569955459924]),
    (Params(4, 0.1, 2.0, 0.5, 1.0), [2.398460689188954, 3.520890059281053, 5.622764393347656],
     [125.50557325387241, 3.520890059281053, 0.3455051532502548]),
]


def test_taylor_at_origin(default_params):
    c = derive(default_params)
    w, wr = taylor_init(default_params, c, 0.0)
    assert (w, wr) == (1.0, 3.0)


def test_taylor_quadratic_value(default_params):
    c = derive(default_params)
    w, wr = taylor_init(default_params, c, 0.01)
    assert w == pytest.approx(1 + 3 * 0.01 - 6 * 0.01**2 / 2, rel=1e-15)
    assert w == pytest.approx(1.0297)
    assert wr == pytest.approx(3 - 6 * 0.01)


@pytest.mark.parametrize("lam", [0.5, 2.0, 3.0])
def test_taylor_origin_value_is_lambda_power(lam):
    p = Params(n=5, m=0.2, rho1=1.5, beta=1.0, lam=lam)
    w, _ = taylor_init(p, derive(p), 0.0)
    assert w == lam ** (-p.rho1 / ((1 - p.m) * p.beta))


@pytest.mark.parametrize("p,wbar,v", FROZEN)
def test_frozen_profile_values(p, wbar, v):
    sol = integrate_profile(p, rho_max=20.0, tol=1e-12)
    rho = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(sol.evaluate(rho)[0], wbar, rtol=1e-9)
    np.testing.assert_allclose(sol.eval_v(rho), v, rtol=1e-9)


def test_default_profile_monotone_and_above_lower_envelope(default_profile):
    assert np.all(np.diff(default_profile.wbar) > 0)
    assert np.all(default_profile.wbar_rho > 0)
    assert np.all(default_profile.wbar >= 1.0)


def test_start_value_matches_taylor(default_profile):
    p, c = default_profile.params, default_profile.consts
    w, _ = taylor_init(p, c, default_profile.rho0)
    assert default_profile.wbar[0] == pytest.approx(w, rel=1e-15)


def test_rho0_halving_agrees(default_params):
    tol = 1e-12
    a = integrate_profile(default_params, rho_max=12, tol=tol, rho0=1e-5)
    b = integrate_profile(default_params, rho_max=12, tol=tol, rho0=5e-6)
    r = np.geomspace(0.1, 10, 50)
    assert np.max(np.abs(a.eval_v(r) / b.eval_v(r) - 1)) <= 10 * tol


def test_change_of_variables(default_profile, profile_m02):
    for sol in (default_profile, profile_m02):
        p = sol.params
        np.testing.assert_allclose(sol.r_grid ** (p.rho1 / p.beta), sol.rho_grid, rtol=1e-14)


def test_origin_limits_for_lambda_two():
    p = Params(n=3, m=0.0, rho1=1.0, beta=1.0, lam=2.0)
    sol = integrate_profile(p, rho_max=5, tol=1e-12)
    r = np.array([1e-4, 1e-6, 1e-8])
    scaled = r**3 * sol.eval_v(r)
    assert np.all(np.abs(scaled - 0.5) <= 3.01 * r)
    assert sol.origin_limits()[0] == 0.5


def test_v_prime_limit_and_sign(default_profile):
    r = np.array([1e-6, 1e-7])
    np.testing.assert_allclose(r**4 * default_profile.eval_v_prime(r), -3.0, rtol=1e-5)
    rr = np.geomspace(1e-3, 11, 500)
    assert np.all(default_profile.eval_v_prime(rr) < 0)
    assert np.all(np.diff(default_profile.eval_v(rr)) < 0)


def test_v_prime_identity_at_nodes(profile_m02):
    sol = profile_m02
    p, c = sol.params, sol.consts
    k = slice(100, 2000, 97)
    rho, r = sol.rho_grid[k], sol.r_grid[k]
    lhs = r ** (c.alpha_m / p.beta + 1) * sol.eval_v_prime(r)
    rhs = (p.rho1 / p.beta * rho * sol.wbar_rho[k]
           - c.alpha_m / p.beta * r ** (c.alpha_m / p.beta) * sol.eval_v(r))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-11)


def test_derivatives_match_finite_differences(profile_m02):
    sol = profile_m02
    for r in (0.3, 1.0, 4.0):
        h = 1e-4 * r
        v = sol.eval_v(np.array([r - h, r, r + h]))
        d1 = (v[2] - v[0]) / (2 * h)
        d2 = (v[2] - 2 * v[1] + v[0]) / h**2
        assert sol.eval_v_prime(r) == pytest.approx(d1, rel=1e-6)
        assert sol.eval_v_second(r) == pytest.approx(d2, rel=1e-4)


def test_out_of_range_and_taylor_below_rho0(default_profile):
    with pytest.raises(OutOfRange):
        default_profile.evaluate(np.array([100.0]))
    with pytest.raises(OutOfRange):
        default_profile.eval_v(np.array([0.0]))
    rho = default_profile.rho0 / 10
    w, _ = default_profile.evaluate(np.array([rho]))
    t, _ = taylor_init(default_profile.params, default_profile.consts, rho)
    assert w[0] == t


def test_ode_residual_bounded(default_profile):
    res = ode_residual(default_profile)
    ds = np.max(np.diff(default_profile.s_grid))
    assert np.max(np.abs(res)) <= 1e-12 + ds**2


def test_envelope_defaults_and_n5():
    for p in (Params(3, 0.0, 1.0, 1.0, 1.0), Params(5, 0.2, 1.0, 1.0, 1.0)):
        sol = integrate_profile(p, rho_max=10, tol=1e-12)
        rep = check_envelope(sol)
        assert rep.admissible and rep.ok
        assert rep.min_lower >= 0 and rep.min_upper >= 0
        assert rep.lower_slack[0] < 1e-3


def test_expansion_residuals_decrease():
    sol = integrate_profile(Params(5, 0.1, 1.0, 1.0, 2.0), rho_max=11, tol=1e-12, rho0=1e-5)
    res = expansion_residuals(sol)
    assert np.all(np.diff(res) < 0)
    expect = sol.consts.A1 * 2.0 ** (-0.1 / 0.9)
    assert fitted_origin_slope(sol) == pytest.approx(expect, rel=1e-3)


@st.composite
def regime(draw):
    n = draw(st.integers(3, 8))
    m = draw(st.floats(0.0, 0.8 * m_upper(n)))
    rho1 = draw(st.floats(0.5, 2.0))
    beta = beta0(n, m, rho1) + draw(st.floats(0.2, 2.0))
    return Params(n=n, m=m, rho1=rho1, beta=beta, lam=draw(st.floats(0.5, 2.0)))


@given(regime())
@settings(max_examples=25, deadline=None)
def test_monotonicity_for_random_regimes(p):
    sol = integrate_profile(p, rho_max=5.0, tol=1e-9)
    c = sol.consts
    assert np.all(sol.z > 0)
    assert np.all(p.rho1 * sol.z < c.alpha_m)
    assert np.all(sol.wbar >= sol.wbar[0])
