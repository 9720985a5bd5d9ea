import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from fastdiff.errors import ConfigError, OutOfRange
from fastdiff.params import Params
from fastdiff.profile import integrate_profile
from fastdiff.reference import (DEFAULT_POINTS, BarenblattSolution, SelfSimilarSolution,
                                constant_field, dphi_m, pde_residual, phi_m,
                                residual_refinement)


@pytest.mark.parametrize("n,m", [(3, sp.Integer(0)), (3, sp.Rational(1, 5)), (5, sp.Rational(1, 10))])
def test_barenblatt_solves_equation_symbolically(n, m):
    r, t, k, T = sp.symbols("r t k T", positive=True)
    d = n - 2 - n * m
    C = 2 * d / (1 - m)
    tau = T - t
    B = (C / (k + tau ** (2 / d) * r**2)) ** (1 / (1 - m)) * tau ** (sp.Integer(n) / d)
    phi = sp.log(B) if m == 0 else B**m / m
    lap = sp.diff(phi, r, 2) + (n - 1) / r * sp.diff(phi, r)
    expr = sp.diff(B, t) - lap
    R = sp.Rational
    for vals in ({r: R(7, 10), t: R(3, 10), k: R(13, 10), T: 1}, {r: 2, t: R(1, 10), k: R(1, 2), T: 2}):
        assert abs(expr.subs(vals).evalf(60)) < 1e-45


def test_barenblatt_hand_values():
    b = BarenblattSolution(Params(3, 0.0, 1.0, 1.0, 1.0), 1.0, 1.0)
    assert b.C_star == 2.0
    assert b(1.0, 0.0) == pytest.approx(1.0)
    b2 = BarenblattSolution(Params(3, 0.2, 1.0, 1.0, 1.0), 1.0, 1.0)
    np.testing.assert_allclose(b2(np.array([0.5, 1.0]), np.array([0.0, 0.5])),
                               [0.7565932872025405, 0.005315817720664667], rtol=1e-13)
    t = 0.4
    d = 3 - 2 - 3 * 0.2
    assert b2(0.0, t) == pytest.approx((b2.C_star / 1.0) ** (1 / 0.8) * (1 - t) ** (3 / d))


def test_barenblatt_vanishes_at_extinction():
    b = BarenblattSolution(Params(3, 0.1, 1.0, 1.0, 1.0), 1.0, 1.0)
    r = np.linspace(0, 10, 50)
    sup = [np.max(b(r, np.full_like(r, t))) for t in (0.9, 0.99, 0.999)]
    assert sup[0] > sup[1] > sup[2] and sup[2] < 1e-12
    with pytest.raises(OutOfRange):
        b(1.0, 1.0)


def test_barenblatt_residual_and_order():
    p = Params(3, 0.0, 1.0, 1.0, 1.0)
    b = BarenblattSolution(p, 1.0, 1.0)
    assert abs(pde_residual(b, p, 1.0, 0.5, 1e-3, 1e-3)) <= 1e-4
    study = residual_refinement(b, p, DEFAULT_POINTS)
    assert study.fitted_order == pytest.approx(2.0, abs=0.3)
    assert len(study.rows()) == 3


def test_constant_field_residual_zero():
    p = Params(3, 0.1, 1.0, 1.0, 1.0)
    assert pde_residual(constant_field(2.5), p, 1.0, 0.5, 1e-2, 1e-2) == 0.0


def test_stencil_guard():
    p = Params(3, 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(OutOfRange):
        pde_residual(constant_field(1.0), p, 0.01, 0.5, 0.02, 0.01)


def test_lift_identities(profile_m02):
    V = SelfSimilarSolution(profile_m02, 2.0)
    r = np.array([0.3, 1.0, 3.0])
    np.testing.assert_allclose(V(r, np.full(3, 1.0)), profile_m02.eval_v(r), rtol=1e-15)
    t = 0.7
    tau = 2.0 - t
    direct = tau**V.alpha_m * profile_m02.eval_v(tau**V.beta * r)
    np.testing.assert_allclose(V(r, np.full(3, t)), direct, rtol=1e-15)


def test_lift_residual_second_order(profile_m02):
    V = SelfSimilarSolution(profile_m02, 1.0)
    study = residual_refinement(V, profile_m02.params, DEFAULT_POINTS)
    assert study.fitted_order == pytest.approx(2.0, abs=0.3)


def test_lift_requires_rho1_one():
    sol = integrate_profile(Params(4, 0.0, 2.0, 0.5, 1.0), rho_max=5, tol=1e-9)
    with pytest.raises(ConfigError):
        SelfSimilarSolution(sol, 1.0)


@pytest.mark.parametrize("m", [0.0, 0.1])
def test_lift_ordering_in_lambda(m):
    base = Params(3, m, 1.0, 1.0, 1.0)
    lo = SelfSimilarSolution(integrate_profile(base.with_(lam=2.0), rho_max=21, tol=1e-10), 1.0)
    hi = SelfSimilarSolution(integrate_profile(base, rho_max=21, tol=1e-10), 1.0)
    r = np.geomspace(0.05, 20, 200)
    for t in (0.0, 0.3, 0.6):
        tt = np.full_like(r, t)
        assert np.all(lo(r, tt) <= hi(r, tt))


@given(st.floats(1e-3, 1e3))
def test_phi_continuous_at_m_zero(u):
    assert phi_m(u, 1e-9) == pytest.approx(np.log(u), abs=1e-6)
    assert dphi_m(u, 0.0) == pytest.approx(1 / u)


@given(st.floats(1e-3, 1e3), st.floats(0.0, 0.5))
def test_phi_derivative(u, m):
    h = 1e-6 * u
    fd = (phi_m(u + h, m) - phi_m(u - h, m)) / (2 * h)
    assert dphi_m(u, m) == pytest.approx(fd, rel=1e-5)
