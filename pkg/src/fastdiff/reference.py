"""Exact solutions of u_t = Laplacian(phi_m(u)) and a finite-difference residual oracle.

Two families are available: the Barenblatt solutions, which are closed form
and regular at the origin, and the self-similar lift of a singular profile,

    V(x, t) = (T - t)**alpha_m * v((T - t)**beta * |x|),

which solves the parabolic equation exactly when alpha_m (1 - m) = 2 beta + 1,
i.e. for rho1 = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OutOfRange
from .params import Params
from .profile import ProfileSolution, integrate_profile


def phi_m(u, m: float):
    """Shifted nonlinearity (u**m - 1)/m, equal to log u at m = 0.

    The constant shift leaves the Laplacian unchanged and makes the family
    continuous at m = 0.
    """
    lu = np.log(np.asarray(u, dtype=float))
    x = m * lu
    # written as log(u) * expm1(x)/x so tiny m (even subnormal) stays accurate
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(x == 0.0, lu, lu * (np.expm1(x) / np.where(x == 0.0, 1.0, x)))


def dphi_m(u, m: float):
    return np.exp((m - 1.0) * np.log(np.asarray(u, dtype=float)))


@dataclass(frozen=True)
class BarenblattSolution:
    params: Params
    k: float
    T: float

    def __post_init__(self):
        p = self.params
        if not (p.n >= 3 and 0 <= p.m < (p.n - 2) / p.n):
            raise ConfigError("Barenblatt solutions need n >= 3 and 0 <= m < (n-2)/n")
        if not (self.k > 0 and self.T > 0):
            raise ConfigError("need k > 0 and T > 0")

    @property
    def C_star(self) -> float:
        p = self.params
        return 2 * (p.n - 2 - p.m * p.n) / (1 - p.m)

    def value(self, r, t):
        """B_k(r, t) for 0 <= t < T (t = 0 is the initial trace)."""
        p = self.params
        r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
        if np.any(t < 0) or np.any(t >= self.T):
            raise OutOfRange("Barenblatt solution is defined for 0 <= t < T")
        d = p.n - 2 - p.n * p.m
        tau = self.T - t
        base = self.C_star / (self.k + tau ** (2 / d) * r**2)
        out = base ** (1 / (1 - p.m)) * tau ** (p.n / d)
        return out if out.ndim else float(out)

    __call__ = value


@dataclass(frozen=True)
class SelfSimilarSolution:
    profile: ProfileSolution
    T: float

    def __post_init__(self):
        p, c = self.profile.params, self.profile.consts
        if not math.isclose(c.alpha_m * (1 - p.m), 2 * p.beta + 1, rel_tol=1e-12):
            raise ConfigError("the self-similar lift solves the parabolic equation only for rho1 = 1")
        if not self.T > 0:
            raise ConfigError("T must be positive")

    @property
    def alpha_m(self) -> float:
        return self.profile.consts.alpha_m

    @property
    def beta(self) -> float:
        return self.profile.params.beta

    def value(self, r, t):
        r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
        if np.any(t >= self.T):
            raise OutOfRange("self-similar solution vanishes at t = T")
        tau = self.T - t
        out = tau**self.alpha_m * self.profile.eval_v(tau**self.beta * r)
        return out if out.ndim else float(out)

    __call__ = value

    def radius_range(self, t0: float, t1: float) -> float:
        """Largest physical radius covered by the profile over [t0, t1]."""
        return self.profile.r_max / (self.T - t0) ** self.beta


def constant_field(c: float):
    def field(r, t):
        return np.full(np.broadcast(np.asarray(r), np.asarray(t)).shape, float(c))
    return field


def pde_residual(field, p: Params, r: float, t: float, h_r: float, h_t: float) -> float:
    """Central-difference residual u_t - (phi_rr + (n-1)/r phi_r) of a radial field.

    ``field(r, t)`` must accept arrays; the whole stencil is evaluated in one
    call.  For an exact solution the residual is O(h_r**2 + h_t**2).
    """
    if r - h_r <= 0:
        raise OutOfRange("spatial stencil crosses the origin")
    rs = np.array([r - h_r, r, r + h_r, r, r])
    ts = np.array([t, t, t, t - h_t, t + h_t])
    u = np.asarray(field(rs, ts), dtype=float)
    f = phi_m(u[:3], p.m)
    lap = (f[2] - 2 * f[1] + f[0]) / h_r**2 + (p.n - 1) / r * (f[2] - f[0]) / (2 * h_r)
    ut = (u[4] - u[3]) / (2 * h_t)
    return float(ut - lap)


@dataclass(frozen=True)
class RefinementStudy:
    h: np.ndarray
    max_residual: np.ndarray
    fitted_order: float

    def rows(self) -> list[dict]:
        return [{"h": float(h), "max_residual": float(e)}
                for h, e in zip(self.h, self.max_residual)]


def fit_order(h, err) -> float:
    """Least-squares slope of log(err) against log(h)."""
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def residual_refinement(field, p: Params, points, hs=(1e-2, 10**-2.5, 1e-3),
                        relative: bool = True) -> RefinementStudy:
    """Max residual over ``points`` for each ``h`` (h_r = h_t = h) and the fitted order.

    With ``relative`` the residual at each point is divided by |u(r, t)|.
    """
    hs = np.asarray(hs, dtype=float)
    maxes = []
    for h in hs:
        worst = 0.0
        for r, t in points:
            res = abs(pde_residual(field, p, r, t, h, h))
            if relative:
                res /= abs(float(field(np.array([r]), np.array([t]))[0]))
            worst = max(worst, res)
        maxes.append(worst)
    maxes = np.asarray(maxes)
    return RefinementStudy(hs, maxes, fit_order(hs, maxes))


DEFAULT_POINTS = ((0.5, 0.25), (1.0, 0.25), (2.0, 0.25), (0.5, 0.5), (1.0, 0.5), (2.0, 0.5))


def self_similar(p: Params, r_max: float, *, tol: float = 1e-12) -> SelfSimilarSolution:
    """Self-similar lift with horizon ``p.T`` covering radii up to ``r_max`` for t >= 0."""
    r_prof = p.T ** p.beta * r_max * 1.05
    prof = integrate_profile(p, rho_max=r_prof ** (p.rho1 / p.beta), tol=tol)
    return SelfSimilarSolution(prof, p.T)


def geometric_mean(f, g):
    def field(r, t):
        return np.sqrt(np.asarray(f(r, t)) * np.asarray(g(r, t)))
    return field
