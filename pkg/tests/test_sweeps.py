import numpy as np
import pytest

from fastdiff.errors import DegenerateFit
from fastdiff.params import Params, derive
from fastdiff.parabolic import AnnulusGrid
from fastdiff.profile import integrate_profile
from fastdiff.sweeps import admissible_m, elliptic_sweep, envelope_constants, fit_rate, parabolic_sweep

P0 = Params(3, 0.0, 1.0, 1.0, 1.0)


def test_fit_rate_synthetic():
    m = np.array([0.2, 0.1, 0.05, 0.025])
    rate, r2 = fit_rate(m, 3 * m)
    assert rate == pytest.approx(1.0) and r2 == pytest.approx(1.0)
    rate, _ = fit_rate(m, 0.5 * m**2)
    assert rate == pytest.approx(2.0)


def test_fit_rate_degenerate():
    with pytest.raises(DegenerateFit):
        fit_rate([0.2, 0.1], [1.0, 0.5])
    with pytest.raises(DegenerateFit):
        fit_rate([0.2, 0.1, 0.05], [1e-14, 1e-15, 1e-16])


@pytest.fixture(scope="module")
def esweep():
    return elliptic_sweep(P0, (0.2, 0.1, 0.05, 0.025, 0.0), (0.5, 2.0))


def test_elliptic_sweep_frozen(esweep):
    np.testing.assert_allclose(esweep.column("c0_norm")[:4],
                               [1.6956137549, 2.2234314117, 1.2314945481, 0.6307520713], rtol=1e-8)
    assert esweep.column("c0_norm")[-1] == 0.0
    assert esweep.column("c2_norm")[-1] == 0.0
    assert not esweep.failures


def test_elliptic_sweep_monotone_on_admissible_m(esweep):
    adm = np.array(esweep.extras["admissible"])
    assert adm.tolist() == [False, True, True, True, True]
    for col in ("c0_norm", "c1_norm", "c2_norm"):
        vals = esweep.column(col)[adm & (esweep.m_values > 0)]
        assert np.all(np.diff(vals) < 0)
    # derivative norms decrease over the whole default sweep
    assert esweep.strictly_decreasing("c1_norm") and esweep.strictly_decreasing("c2_norm")


def test_envelope_constants_converge():
    ms = [0.1, 0.01, 0.001, 1e-5]
    env = envelope_constants(P0, ms)
    gaps = np.abs(np.array(env["C_m"]) - env["C_0"])
    assert env["C_0"] == derive(P0).C0 == 3.0
    assert np.all(np.diff(gaps) < 0) and gaps[-1] < 1e-3


def test_limit_profile_origin_normalization():
    sol = integrate_profile(P0.with_(lam=2.0), rho_max=3, tol=1e-12)
    r = 1e-7
    assert r**3 * sol.eval_v(r) == pytest.approx(2.0**-1, rel=1e-6)


def test_admissible_m():
    assert admissible_m(P0, 0.1) and not admissible_m(P0, 0.2)


def test_parabolic_sweep_small_grid():
    g = AnnulusGrid(0.05, 20.0, 61, 0.5, 30)
    rep = parabolic_sweep(P0, (0.1, 0.05, 0.025), g)
    assert rep.strictly_decreasing("sup_norm")
    assert all(s["ok"] for s in rep.extras["sandwich"])
    assert rep.extras["sandwich"][0]["m"] == 0.0
    assert rep.fitted_rate is not None and rep.fitted_rate > 0
