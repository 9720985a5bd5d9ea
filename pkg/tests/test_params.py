import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastdiff.errors import ConfigError
from fastdiff.params import (Params, beta0, derive, envelope_admissible, m_upper, origin_curvature,
                             origin_slope, origin_value, validate)


def test_boundary_m_is_invalid():
    rep = validate(Params(n=3, m=1 / 3, rho1=1.0, beta=1.0, lam=1.0))
    assert not rep.ok
    assert any("m" in v for v in rep.violations)


def test_beta_at_or_below_beta0_rejected_in_strict_mode():
    p = Params(n=5, m=0.2, rho1=1.0, beta=0.05, lam=1.0)
    assert beta0(5, 0.2, 1.0) == pytest.approx(0.1)
    assert not validate(p, strict=True).ok
    assert not validate(p, strict=False).ok
    edge = p.with_(beta=beta0(5, 0.2, 1.0))
    assert validate(edge, strict=False).ok
    assert not validate(edge, strict=True).ok


def test_m_zero_default_is_valid():
    p = Params(n=3, m=0.0, rho1=1.0, beta=1.0, lam=1.0)
    assert validate(p, strict=True).ok
    assert beta0(3, 0.0, 1.0) == 0.0


@pytest.mark.parametrize("bad", [
    dict(n=2), dict(m=-0.1), dict(rho1=0.0), dict(lam=-1.0), dict(T=0.0)])
def test_domain_violations(bad):
    p = Params(n=3, m=0.0, rho1=1.0, beta=1.0, lam=1.0).with_(**bad)
    assert not validate(p, strict=False).ok
    with pytest.raises(ConfigError):
        validate(p, strict=False).raise_if_invalid()


def test_derived_row_n3_m0():
    c = derive(Params(n=3, m=0.0, rho1=1.0, beta=1.0, lam=1.0))
    assert (c.alpha_m, c.a1, c.a2, c.a3, c.A1, c.A2, c.w_inf) == (3, 2, 1, 3, 3, -6, 2)
    assert c.Cm == 3.0
    assert c.C0 == 3.0
    assert c.w1 == 2.0
    assert c.beta1_0 == 1.0


def test_derived_row_n5_m02():
    c = derive(Params(n=5, m=0.2, rho1=1.0, beta=1.0, lam=1.0))
    expect = dict(alpha_m=3.75, beta0=0.1, a1=2.5, a2=1.0, a3=8.4375, A1=8.4375,
                  A2=-6.85546875)
    for k, v in expect.items():
        assert getattr(c, k) == pytest.approx(v, rel=1e-12), k


def test_derive_is_exact_polynomial_at_m0():
    p = Params(n=6, m=0.0, rho1=1.5, beta=0.7, lam=2.0)
    c = derive(p)
    assert c.a1 == pytest.approx(((p.n - 2) * p.beta + p.rho1) / p.rho1)
    assert c.a3 == pytest.approx(c.alpha_m * p.beta * (p.n - 2) / p.rho1**2)
    assert c.A2 == pytest.approx(-c.a3 * c.a1 / c.a2**2)
    assert c.w_inf == pytest.approx(2 * (p.n - 2) / p.rho1)


def test_beta0_domain_error():
    with pytest.raises(ConfigError):
        beta0(3, 1 / 3, 1.0)


def test_derive_rejects_zero_beta():
    with pytest.raises(ConfigError):
        derive(Params(n=3, m=0.0, rho1=1.0, beta=0.0, lam=1.0))


def test_mapping_roundtrip_and_keys():
    p = Params(n=4, m=0.1, rho1=2.0, beta=0.5, lam=1.5, T=2.0)
    assert Params.from_mapping(p.to_dict()) == p
    d = p.to_dict()
    del d["beta"]
    with pytest.raises(ConfigError, match="beta"):
        Params.from_mapping(d)
    with pytest.raises(ConfigError, match="gamma"):
        Params.from_mapping({**p.to_dict(), "gamma": 1})
    with pytest.raises(ConfigError):
        Params.from_json("[1, 2]")
    with pytest.raises(ConfigError):
        Params.from_mapping({**p.to_dict(), "n": 3.5})


def test_origin_expansion_coefficients():
    p = Params(n=5, m=0.2, rho1=1.0, beta=1.0, lam=2.0)
    c = derive(p)
    k = p.rho1 / ((1 - p.m) * p.beta)
    assert origin_value(p) == pytest.approx(2.0 ** -k)
    assert origin_slope(p, c) == pytest.approx(c.A1 * 2.0 ** (-p.m * k))
    assert origin_curvature(p, c) == pytest.approx(c.A2 * 2.0 ** (-(2 * p.m - 1) * k))


def test_envelope_admissibility_threshold():
    # n - 2 - 2 m alpha_m / beta > 0 with n = 3, beta = rho1 = 1 means m < 1/7
    base = Params(n=3, m=0.0, rho1=1.0, beta=1.0, lam=1.0)
    assert envelope_admissible(base.with_(m=0.14))
    assert not envelope_admissible(base.with_(m=0.15))


@st.composite
def strict_params(draw):
    n = draw(st.integers(3, 10))
    m = draw(st.floats(0.0, 0.95 * m_upper(n)))
    rho1 = draw(st.floats(0.05, 5.0))
    b0 = beta0(n, m, rho1)
    beta = b0 + draw(st.floats(1e-3, 5.0))
    return Params(n=n, m=m, rho1=rho1, beta=beta, lam=draw(st.floats(0.05, 10.0)))


@given(strict_params())
@settings(max_examples=200, deadline=None)
def test_strict_regime_identities(p):
    assert validate(p, strict=True).ok
    c = derive(p)
    target = 2 * p.beta + p.rho1
    assert abs(c.alpha_m * (1 - p.m) - target) <= 4 * math.ulp(target)
    assert c.a2 > 0
    assert c.a3 > 0
    assert p.n - 2 - p.m * c.alpha_m / p.beta > 0


def _vec(p):
    return np.array([v for v in derive(p).to_dict().values() if v is not None])


@given(strict_params(), st.floats(1e-8, 1e-6))
@settings(max_examples=100, deadline=None)
def test_derive_continuous_in_m(p, dm):
    # finite-difference continuity: shrinking the step shrinks the change
    if not validate(p.with_(m=p.m + dm)).ok:
        return
    base = _vec(p)
    d1 = np.abs(_vec(p.with_(m=p.m + dm)) - base)
    d2 = np.abs(_vec(p.with_(m=p.m + dm / 10)) - base)
    assert np.all(d2 <= 0.2 * d1 + 1e-12 * (1 + np.abs(base)))


@given(st.integers(3, 12), st.floats(0.05, 5.0), st.floats(0.05, 5.0))
def test_w_inf_identity_at_m0(n, rho1, beta):
    c = derive(Params(n=n, m=0.0, rho1=rho1, beta=beta, lam=1.0))
    # alpha0 - 2 beta cancels when beta >> rho1, hence the loose tolerance
    assert c.w_inf == pytest.approx(2 * (n - 2) / rho1, rel=1e-12)
    assert c.alpha0 - 2 * beta == pytest.approx(rho1, rel=1e-12)
