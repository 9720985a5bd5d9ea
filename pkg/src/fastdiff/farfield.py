"""Far-field behaviour of the logarithmic profile: r**2 v(r) -> 2(n-2)/(alpha-2*beta).

``w(r) = r**2 v(r)`` satisfies an equidimensional equation, so its approach
to the limit is a power law in ``r``.  Linearizing around the limit gives the
indicial equation

    k**2 + (n - 2 + beta * w_inf) k + 2 (n - 2) = 0,

whose slow root is ``-1`` in the default configuration (n=3, rho1=beta=1),
hence the ``c / r`` correction model used for extrapolation.  The measured
tail slope is checked against that model before the extrapolation is
trusted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InsufficientRange
from .profile import ProfileSolution

DEFAULT_LADDER = tuple(10 ** e for e in (1.0, 1.5, 2.0, 2.5, 3.0))
SLOPE_MODEL = -1.0
SLOPE_WINDOW = 0.3


@dataclass(frozen=True)
class FarFieldReport:
    r: np.ndarray
    w: np.ndarray
    raw_limit: float
    extrapolated_limit: float
    target: float
    rel_error_raw: float
    rel_error_extrapolated: float
    tail_slope: float
    model_reliable: bool
    nearest_branch: str

    def summary(self) -> dict:
        return {
            "raw_limit": self.raw_limit,
            "extrapolated_limit": self.extrapolated_limit,
            "target": self.target,
            "rel_error_raw": self.rel_error_raw,
            "rel_error_extrapolated": self.rel_error_extrapolated,
            "tail_slope": self.tail_slope,
            "model_reliable": self.model_reliable,
            "nearest_branch": self.nearest_branch,
        }


def extrapolate_inverse_r(r, w) -> float:
    """Least-squares limit of ``w = L + c / r``; exact when the data follow the model."""
    r = np.asarray(r, dtype=float)
    w = np.asarray(w, dtype=float)
    if r.size < 2:
        raise ValueError("need at least two samples to extrapolate")
    A = np.column_stack([np.ones_like(r), 1.0 / r])
    (limit, _), *_ = np.linalg.lstsq(A, w, rcond=None)
    return float(limit)


def tail_slope(r, w, target: float) -> float:
    """Slope of log|w - target| against log r (least squares)."""
    dev = np.abs(np.asarray(w, dtype=float) - target)
    if np.any(dev == 0):
        return math.nan
    return float(np.polyfit(np.log(r), np.log(dev), 1)[0])


def farfield_limit(sol: ProfileSolution, r_values=DEFAULT_LADDER, *,
                   n_extrapolate: int = 3, diagnostic: bool = False) -> FarFieldReport:
    """Sample ``w = r**2 v`` on ``r_values`` and estimate its limit.

    The theorem covers only the logarithmic profile (m = 0); other m are
    accepted with ``diagnostic=True`` and are reported against the same target.
    """
    p, c = sol.params, sol.consts
    if p.m != 0 and not diagnostic:
        raise ConfigError("far-field limit is asserted only for m = 0; pass diagnostic=True")
    r = np.asarray(sorted(r_values), dtype=float)
    if r.size < 3:
        raise ValueError("need at least three radii")
    if r[-1] > sol.r_max * (1 + 1e-12):
        raise InsufficientRange(
            f"profile reaches r = {sol.r_max:.6g}, far-field ladder needs {r[-1]:.6g}")
    w = r**2 * sol.eval_v(r)
    target = c.w_inf
    tail_r, tail_w = r[-n_extrapolate:], w[-n_extrapolate:]
    extrap = extrapolate_inverse_r(tail_r, tail_w)
    slope = tail_slope(tail_r, tail_w, target)
    reliable = bool(abs(slope - SLOPE_MODEL) <= SLOPE_WINDOW)
    branches = {"zero": 0.0, "w_inf": target}
    if c.w1 is not None:
        branches["w1"] = c.w1
    nearest = min(branches, key=lambda k: abs(branches[k] - extrap))
    return FarFieldReport(
        r=r, w=w, raw_limit=float(w[-1]), extrapolated_limit=extrap, target=target,
        rel_error_raw=abs(w[-1] / target - 1), rel_error_extrapolated=abs(extrap / target - 1),
        tail_slope=slope, model_reliable=reliable, nearest_branch=nearest)


def w_equation_residual(w_fn, r: float, h: float, n: int, beta: float,
                        alpha: float) -> float:
    """Central-difference residual of the equation for ``w = r**2 v`` (m = 0), times r**2.

        (w'/w)' + (n-1)/r * w'/w + beta/r * w' + ((alpha-2 beta) w - 2(n-2)) / r**2
    """
    if r - h <= 0:
        raise ValueError("stencil crosses the origin")
    wm, w0, wp = (float(x) for x in np.asarray(w_fn(np.array([r - h, r, r + h]))))
    d1 = (wp - wm) / (2 * h)
    d2 = (wp - 2 * w0 + wm) / h**2
    g = d1 / w0
    dg = d2 / w0 - g * g
    res = dg + (n - 1) / r * g + beta / r * d1 + ((alpha - 2 * beta) * w0 - 2 * (n - 2)) / r**2
    return float(r**2 * res)


def w_ode_residual(sol: ProfileSolution, r: float, h: float | None = None) -> float:
    """Residual of the ``w``-equation evaluated from the integrated m = 0 profile."""
    p, c = sol.params, sol.consts
    if p.m != 0:
        raise ConfigError("the w-equation holds for the logarithmic profile (m = 0)")
    h = 1e-3 * r if h is None else h
    if r + h > sol.r_max or r - h <= 0:
        raise InsufficientRange(f"stencil around r = {r} leaves the profile range")
    return w_equation_residual(lambda x: x**2 * sol.eval_v(x), r, h, p.n, p.beta, c.alpha0)
