"""Singular-limit sweeps m -> 0+ for the elliptic profiles and the parabolic flow.

Every m, including the reference m = 0, runs through the same code path;
the shifted nonlinearity makes m = 0 a regular point.  Per-m work items are
independent and run in a thread pool (the kernels release the GIL); results
are assembled in the order of ``m_values``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateFit, FastDiffError
from .parabolic import AnnulusGrid, check_sandwich, default_grid, max_error, solve_from_field
from .params import Params, derive, envelope_admissible, validate
from .profile import integrate_profile
from .reference import geometric_mean, self_similar

NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class SweepReport:
    kind: str
    m_values: np.ndarray
    norms: dict                 # column name -> array aligned with m_values
    annulus: tuple[float, float]
    fitted_rate: float | None
    r_squared: float | None
    failures: dict = field(default_factory=dict)     # m -> message
    extras: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.norms[name]

    def strictly_decreasing(self, name: str) -> bool:
        """Norms decrease strictly as m decreases (m = 0 rows are skipped)."""
        order = np.argsort(-self.m_values)
        vals = self.norms[name][order][self.m_values[order] > 0]
        return bool(np.all(np.diff(vals) < 0)) and vals.size > 1

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "annulus": list(self.annulus),
            "m_values": [float(m) for m in self.m_values],
            "norms": {k: [float(x) for x in v] for k, v in self.norms.items()},
            "fitted_rate": self.fitted_rate,
            "r_squared": self.r_squared,
            "failures": {str(k): v for k, v in self.failures.items()},
            **self.extras,
        }


def fit_rate(m_values, norms) -> tuple[float, float]:
    """Slope of log(norm) against log(m) and the R**2 of that fit.

    Only rows with m > 0 are used.  Raises DegenerateFit when fewer than
    three usable rows remain or the norms sit at solver noise.
    """
    m = np.asarray(m_values, dtype=float)
    y = np.asarray(norms, dtype=float)
    keep = (m > 0) & np.isfinite(y)
    m, y = m[keep], y[keep]
    if m.size < 3:
        raise DegenerateFit("need at least three positive m values")
    if np.any(y <= NOISE_FLOOR):
        raise DegenerateFit("norms are at the solver noise floor")
    x, ly = np.log(m), np.log(y)
    slope, icpt = np.polyfit(x, ly, 1)
    fit = slope * x + icpt
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum((ly - fit) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def _rate(m_values, norms):
    try:
        return fit_rate(m_values, norms)
    except DegenerateFit:
        return None, None


def admissible_m(base: Params, m: float) -> bool:
    """True when m is inside the range where the envelope bounds are available."""
    p = base.with_(m=m)
    return validate(p, strict=True).ok and envelope_admissible(p)


def envelope_constants(base: Params, m_values) -> dict:
    """C_m for each m and the m = 0 value C_0 they approach."""
    return {"C_m": [derive(base.with_(m=float(m))).Cm for m in m_values],
            "C_0": derive(base.with_(m=0.0)).C0}


def _map(fn, items, workers):
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def elliptic_sweep(base: Params, m_values=(0.2, 0.1, 0.05, 0.025), annulus=(0.5, 2.0), *,
                   tol: float = 1e-12, n_mesh: int = 200, workers: int = 4) -> SweepReport:
    """Sup-norm differences of v, v' and v'' against the m = 0 profile on ``annulus``."""
    m_values = np.asarray(m_values, dtype=float)
    r = np.geomspace(annulus[0], annulus[1], n_mesh)
    rho_max = (annulus[1] * 1.05) ** (base.rho1 / base.beta)

    def work(m):
        p = base.with_(m=float(m))
        try:
            validate(p, strict=True).raise_if_invalid()
            sol = integrate_profile(p, rho_max=rho_max, tol=tol)
            return np.array([sol.eval_v(r), sol.eval_v_prime(r), sol.eval_v_second(r)])
        except FastDiffError as exc:
            return exc

    ref = work(0.0)
    if isinstance(ref, Exception):
        raise ref
    results = _map(work, m_values, workers)
    norms = np.full((3, m_values.size), np.nan)
    failures = {}
    for j, (m, res) in enumerate(zip(m_values, results)):
        if isinstance(res, Exception):
            failures[float(m)] = f"{type(res).__name__}: {res}"
            continue
        norms[:, j] = np.abs(res - ref).max(axis=1)
    cols = {"c0_norm": norms[0], "c1_norm": norms[1], "c2_norm": norms[2]}
    rate, r2 = _rate(m_values, cols["c0_norm"])
    extras = {"admissible": [admissible_m(base, float(m)) for m in m_values],
              **envelope_constants(base, m_values)}
    return SweepReport("elliptic", m_values, cols, tuple(annulus), rate, r2, failures, extras)


def parabolic_sweep(base: Params, m_values=(0.2, 0.1, 0.05), grid: AnnulusGrid | None = None, *,
                    lam1: float = 2.0, lam2: float = 1.0, init: str = "geomean",
                    window=(0.1, 0.9), tol: float = 1e-12, workers: int = 4) -> SweepReport:
    """Sup-norm of u^(m) - u^(0) over interior nodes and the time window.

    Initial and boundary data come from the m-dependent envelopes
    ``V_lam1 <= V_lam2`` (geometric mean, lower or upper).  Each run also
    gets a sandwich check whose tolerance is five times the measured
    discretization error of the same grid on the exact envelope.
    """
    if not lam1 > lam2 > 0:
        raise ConfigError("need lam1 > lam2 > 0")
    if init not in ("geomean", "lower", "upper"):
        raise ConfigError(f"unknown init {init!r}")
    grid = default_grid(base) if grid is None else grid
    m_values = np.asarray(m_values, dtype=float)
    tw = (grid.t >= window[0] * grid.t_end - 1e-12) & (grid.t <= window[1] * grid.t_end + 1e-12)

    def work(m):
        p = base.with_(m=float(m))
        try:
            validate(p, strict=True).raise_if_invalid()
            lo = self_similar(p.with_(lam=lam1), grid.r_out, tol=tol)
            hi = self_similar(p.with_(lam=lam2), grid.r_out, tol=tol)
            data = {"geomean": geometric_mean(lo, hi), "lower": lo, "upper": hi}[init]
            sol = solve_from_field(p, grid, data, f"envelope-{init}")
            disc = max(max_error(solve_from_field(p, grid, lo, "envelope-lower"), lo),
                       max_error(solve_from_field(p, grid, hi, "envelope-upper"), hi))
            return sol, check_sandwich(sol, lo, hi, tolerance=5 * disc), disc
        except FastDiffError as exc:
            return exc

    items = [0.0] + [float(m) for m in m_values]
    results = _map(work, items, workers)
    ref = results[0]
    if isinstance(ref, Exception):
        raise ref
    u0 = ref[0].u[tw][:, 1:-1]
    sup, rel = np.full(m_values.size, np.nan), np.full(m_values.size, np.nan)
    failures, sandwich = {}, []
    for j, (m, res) in enumerate(zip(items, results)):
        if isinstance(res, Exception):
            failures[m] = f"{type(res).__name__}: {res}"
            continue
        sol, rep, disc = res
        sandwich.append({"m": m, "ok": rep.ok, "min_slack": rep.min_slack,
                         "ordered_min_slack": rep.ordered_min_slack,
                         "inverted_nodes": rep.inverted_nodes,
                         "tolerance": rep.tolerance, "discretization_error": disc})
        if j == 0:
            continue
        d = sol.u[tw][:, 1:-1] - u0
        sup[j - 1] = np.abs(d).max()
        rel[j - 1] = np.abs(d / u0).max()
    rate, r2 = _rate(m_values, sup)
    extras = {"sandwich": sandwich, "relative_sup_norm": [float(x) for x in rel],
              "grid": {"r_in": grid.r_in, "r_out": grid.r_out, "nr": grid.nr,
                       "t_end": grid.t_end, "nt": grid.nt},
              "admissible": [admissible_m(base, float(m)) for m in m_values]}
    return SweepReport("parabolic", m_values, {"sup_norm": sup}, (grid.r_in, grid.r_out),
                       rate, r2, failures, extras)
