"""Singular radial profiles of the elliptic equation.

The profile ``v`` blows up like ``r**(-alpha_m/beta)`` at the origin.  It is
computed through the desingularized variable

    wbar(rho) = r**(alpha_m/beta) * v(r),    rho = r**(rho1/beta),

which is C^2 up to ``rho = 0``.  Integration runs in ``s = log(rho)`` on the
state ``(log wbar, z)`` with ``z = rho * wbar_rho / wbar``:

    d(log wbar)/ds = z
    dz/ds = a3 + (1 - a1) z - m z**2 - a2 z wbar**(1-m) / rho

started from the quadratic Taylor polynomial of ``wbar`` at a small ``rho0``.
Near the origin the last term makes the system stiff and attracts ``z`` onto
the regular branch, so initialization errors in ``z`` die out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import IntegrationFailure, MonotonicityViolation, OutOfRange
from .params import (DerivedConstants, Params, derive, envelope_admissible,
                     origin_curvature, origin_slope, origin_value, validate)

DEFAULT_TOL = 1e-10
MAX_LOG_STEP = 0.2          # rho_{k+1} / rho_k <= e**0.2 (about 1 + 1/4.5)
DENSE_REFINE = 10           # dense-output substeps per accepted step
ANCHOR_SPAN = 0.5           # batches narrower than this share one anchor
MAX_DENSE_STEPS = 4000


def taylor_init(p: Params, c: DerivedConstants, rho):
    """Quadratic Taylor polynomial of ``wbar`` at the origin and its derivative."""
    rho = np.asarray(rho, dtype=float)
    w0 = origin_value(p)
    w1 = origin_slope(p, c)
    w2 = origin_curvature(p, c)
    wbar = w0 + w1 * rho + 0.5 * w2 * rho**2
    wbar_rho = w1 + w2 * rho
    if wbar.ndim == 0:
        return float(wbar), float(wbar_rho)
    return wbar, wbar_rho


def default_rho0(p: Params, c: DerivedConstants, tol: float) -> float:
    """Initialization abscissa keeping the cubic Taylor remainder below ``tol``."""
    curv = abs(origin_curvature(p, c))
    if curv == 0:
        return 1e-4
    return min(1e-4, (tol / curv) ** (1 / 3))


@dataclass(frozen=True, eq=False)
class ProfileSolution:
    params: Params
    consts: DerivedConstants
    s_grid: np.ndarray
    log_wbar: np.ndarray
    z: np.ndarray
    rho0: float
    integrator_tol: tuple[float, float]

    @property
    def rho_grid(self) -> np.ndarray:
        return np.exp(self.s_grid)

    @property
    def wbar(self) -> np.ndarray:
        return np.exp(self.log_wbar)

    @property
    def wbar_rho(self) -> np.ndarray:
        return self.z * self.wbar / self.rho_grid

    @property
    def rho_max(self) -> float:
        return float(math.exp(self.s_grid[-1]))

    @property
    def r_grid(self) -> np.ndarray:
        return self.rho_grid ** (self.params.beta / self.params.rho1)

    @property
    def r_max(self) -> float:
        return self.rho_max ** (self.params.beta / self.params.rho1)

    # -- dense evaluation -------------------------------------------------

    def _rhs(self, s, L, z):
        c, m = self.consts, self.params.m
        return z, c.a3 + (1.0 - c.a1) * z - m * z * z - c.a2 * z * np.exp((1.0 - m) * L - s)

    def _reintegrate(self, s_q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(log wbar, z) at ``s_q`` by fixed-step DP5 from stored nodes.

        A narrow batch is integrated from a single anchor node with a common
        step count, so the result is a smooth function of the query point
        (finite differences of it see no interpolation kinks).
        """
        S = self.s_grid
        nsteps = 0
        if s_q.size and s_q.max() - s_q.min() <= ANCHOR_SPAN:
            k = max(int(np.searchsorted(S, s_q.min(), side="right")) - 1, 0)
            k_end = int(np.searchsorted(S, s_q.max(), side="left"))
            k_end = min(max(k_end, k + 1), len(S) - 1)
            if k_end > k:
                h_cap = float(np.min(np.diff(S[k:k_end + 1]))) / DENSE_REFINE
                nsteps = max(1, math.ceil(float(np.max(s_q - S[k])) / h_cap))
                anchor = np.full(s_q.shape, k)
        if not 0 < nsteps <= MAX_DENSE_STEPS:
            anchor = np.clip(np.searchsorted(S, s_q, side="right") - 1, 0, len(S) - 1)
            nsteps = DENSE_REFINE
        s = S[anchor].copy()
        L = self.log_wbar[anchor].copy()
        z = self.z[anchor].copy()
        h = (s_q - s) / nsteps
        for _ in range(nsteps):
            k1L, k1z = self._rhs(s, L, z)
            k2L, k2z = self._rhs(s + h / 5, L + h * k1L / 5, z + h * k1z / 5)
            k3L, k3z = self._rhs(s + 3 * h / 10, L + h * (3 * k1L + 9 * k2L) / 40,
                                 z + h * (3 * k1z + 9 * k2z) / 40)
            k4L, k4z = self._rhs(s + 4 * h / 5,
                                 L + h * (44 / 45 * k1L - 56 / 15 * k2L + 32 / 9 * k3L),
                                 z + h * (44 / 45 * k1z - 56 / 15 * k2z + 32 / 9 * k3z))
            k5L, k5z = self._rhs(s + 8 * h / 9,
                                 L + h * (19372 / 6561 * k1L - 25360 / 2187 * k2L
                                          + 64448 / 6561 * k3L - 212 / 729 * k4L),
                                 z + h * (19372 / 6561 * k1z - 25360 / 2187 * k2z
                                          + 64448 / 6561 * k3z - 212 / 729 * k4z))
            k6L, k6z = self._rhs(s + h,
                                 L + h * (9017 / 3168 * k1L - 355 / 33 * k2L
                                          + 46732 / 5247 * k3L + 49 / 176 * k4L
                                          - 5103 / 18656 * k5L),
                                 z + h * (9017 / 3168 * k1z - 355 / 33 * k2z
                                          + 46732 / 5247 * k3z + 49 / 176 * k4z
                                          - 5103 / 18656 * k5z))
            L = L + h * (35 / 384 * k1L + 500 / 1113 * k3L + 125 / 192 * k4L
                         - 2187 / 6784 * k5L + 11 / 84 * k6L)
            z = z + h * (35 / 384 * k1z + 500 / 1113 * k3z + 125 / 192 * k4z
                         - 2187 / 6784 * k5z + 11 / 84 * k6z)
            s = s + h
        return L, z

    def evaluate(self, rho) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(wbar, wbar_rho)`` at arbitrary ``0 <= rho <= rho_max``.

        Below ``rho0`` the Taylor polynomial is used.
        """
        rho = np.asarray(rho, dtype=float)
        flat = np.atleast_1d(rho).ravel()
        if np.any(flat < 0) or np.any(~np.isfinite(flat)):
            raise OutOfRange("rho must be finite and nonnegative")
        if np.any(flat > self.rho_max * (1 + 1e-12)):
            raise OutOfRange(f"rho = {flat.max():.6g} beyond rho_max = {self.rho_max:.6g}")
        w = np.empty_like(flat)
        wr = np.empty_like(flat)
        inner = flat < self.rho0
        if np.any(inner):
            w[inner], wr[inner] = taylor_init(self.params, self.consts, flat[inner])
        outer = ~inner
        if np.any(outer):
            s_q = np.minimum(np.log(flat[outer]), self.s_grid[-1])
            L, z = self._reintegrate(s_q)
            w[outer] = np.exp(L)
            wr[outer] = z * w[outer] / flat[outer]
        return w.reshape(rho.shape), wr.reshape(rho.shape)

    def _rho_of_r(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise OutOfRange("v is infinite at r = 0; use origin_limits() for the scaled limits")
        return r ** (self.params.rho1 / self.params.beta)

    def eval_v(self, r):
        """Profile value ``v(r) = r**(-alpha_m/beta) * wbar(r**(rho1/beta))``."""
        p, c = self.params, self.consts
        w, _ = self.evaluate(self._rho_of_r(r))
        return np.asarray(r, dtype=float) ** (-c.alpha_m / p.beta) * w

    def eval_v_prime(self, r):
        """``v'(r)`` from the chain-rule identity

        r**(alpha_m/beta + 1) v'(r) = (rho1/beta) rho wbar_rho - (alpha_m/beta) wbar.
        """
        p, c = self.params, self.consts
        rho = self._rho_of_r(r)
        w, wr = self.evaluate(rho)
        r = np.asarray(r, dtype=float)
        scaled = p.rho1 / p.beta * rho * wr - c.alpha_m / p.beta * w
        return r ** (-c.alpha_m / p.beta - 1) * scaled

    def eval_v_second(self, r):
        """``v''(r)`` solved from the radial elliptic equation itself."""
        p, c = self.params, self.consts
        r = np.asarray(r, dtype=float)
        v = self.eval_v(r)
        vp = self.eval_v_prime(r)
        m = p.m
        return ((1 - m) * vp**2 / v - (p.n - 1) * vp / r - c.alpha_m * v ** (2 - m)
                - p.beta * r * v ** (1 - m) * vp)

    def origin_limits(self) -> tuple[float, float]:
        """Limits of ``r**(a/b) v`` and ``r**(a/b + 1) v'`` as r -> 0 (a = alpha_m, b = beta)."""
        w0 = origin_value(self.params)
        return w0, -self.consts.alpha_m / self.params.beta * w0


def integrate_profile(p: Params, c: DerivedConstants | None = None, *,
                      rho_max: float = 10.0, tol: float = DEFAULT_TOL,
                      rho0: float | None = None,
                      max_steps: int = 50_000_000) -> ProfileSolution:
    """Integrate the desingularized profile from ``rho0`` out to ``rho_max``."""
    validate(p, strict=True).raise_if_invalid()
    c = derive(p) if c is None else c
    if rho0 is None:
        rho0 = default_rho0(p, c, tol)
    if not 0 < rho0 < rho_max:
        raise ValueError(f"need 0 < rho0 < rho_max, got rho0={rho0}, rho_max={rho_max}")
    w, wr = taylor_init(p, c, rho0)
    # explicit stability bound of the stiff origin term
    h0 = min(MAX_LOG_STEP, 0.5 * rho0 / (c.a2 * w ** (1 - p.m)))
    status, s, L, z, _, _ = kernels.profile_dp45(
        math.log(rho0), math.log(rho_max), math.log(w), rho0 * wr / w,
        c.a1, c.a2, c.a3, p.m, tol, tol, h0, MAX_LOG_STEP, max_steps)
    if status == 1:
        raise IntegrationFailure(f"step size collapsed near rho = {math.exp(s[-1]):.6g}")
    if status == 2:
        raise IntegrationFailure(f"step budget {max_steps} exhausted at rho = {math.exp(s[-1]):.6g}")
    bad = np.flatnonzero(z <= 0)
    if bad.size:
        raise MonotonicityViolation(
            f"wbar_rho <= 0 at rho = {math.exp(s[bad[0]]):.6g}")
    sol = ProfileSolution(p, c, s, L, z, rho0, (tol, tol))
    if np.any(p.rho1 * z >= c.alpha_m):
        k = int(np.flatnonzero(p.rho1 * z >= c.alpha_m)[0])
        raise MonotonicityViolation(f"v' >= 0 at r = {sol.r_grid[k]:.6g}")
    return sol


def ode_residual(sol: ProfileSolution) -> np.ndarray:
    """Finite-difference residual of the profile ODE on the output grid.

    ``log wbar`` is differentiated twice in ``s = log(rho)`` with second-order
    nonuniform differences; the returned value is the ODE written as
    ``rho**2 * (LHS - RHS)`` divided by ``a3``.  Its size is bounded by a
    modest constant times ``tol + max(diff(s))**2``.
    """
    c, m = sol.consts, sol.params.m
    S, L = sol.s_grid, sol.log_wbar
    z = np.gradient(L, S, edge_order=2)
    dz = np.gradient(z, S, edge_order=2)
    rhs = c.a3 + (1 - c.a1) * z - m * z * z - c.a2 * z * np.exp((1 - m) * L - S)
    return (dz - rhs)[1:-1] / c.a3


@dataclass(frozen=True)
class EnvelopeReport:
    rho: np.ndarray
    lower_slack: np.ndarray
    upper_slack: np.ndarray
    admissible: bool
    tolerance: float

    @property
    def min_lower(self) -> float:
        return float(self.lower_slack.min())

    @property
    def min_upper(self) -> float:
        return float(self.upper_slack.min())

    @property
    def violations(self) -> int:
        return int(np.sum(self.lower_slack < -self.tolerance)
                   + np.sum(self.upper_slack < -self.tolerance))

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_envelope(sol: ProfileSolution, tolerance: float = 1e-8) -> EnvelopeReport:
    """Relative slack of ``wbar`` against the two-sided envelope at every node.

    lower: wbar >= wbar(0)
    upper: wbar <= wbar(0) * exp(C_m * lambda**(rho1/beta) * rho)

    The upper bound is proven only for ``envelope_admissible`` parameters;
    the report still carries the slack otherwise.
    """
    p, c = sol.params, sol.consts
    log_lo = math.log(origin_value(p))
    rho = sol.rho_grid
    log_hi = log_lo + c.Cm * p.lam ** (p.rho1 / p.beta) * rho
    lower = np.expm1(sol.log_wbar - log_lo)
    upper = -np.expm1(sol.log_wbar - log_hi)
    return EnvelopeReport(rho, lower, upper, envelope_admissible(p), tolerance)


def expansion_residuals(sol: ProfileSolution, rhos=(1e-2, 1e-3, 1e-4)) -> np.ndarray:
    """``|wbar(rho) - quadratic Taylor| / rho**2`` at the given abscissae."""
    rhos = np.asarray(rhos, dtype=float)
    w, _ = sol.evaluate(rhos)
    taylor, _ = taylor_init(sol.params, sol.consts, rhos)
    return np.abs(w - taylor) / rhos**2


def fitted_origin_slope(sol: ProfileSolution, span: float = 10.0) -> float:
    """Least-squares slope of ``wbar`` against ``rho`` on ``[rho0, span*rho0]``."""
    rho = sol.rho_grid
    mask = rho <= span * sol.rho0 * (1 + 1e-12)
    if mask.sum() < 3:
        rho_s = np.geomspace(sol.rho0, span * sol.rho0, 16)
        w, _ = sol.evaluate(rho_s)
    else:
        rho_s, w = rho[mask], sol.wbar[mask]
    return float(np.polyfit(rho_s, w, 1)[0])
