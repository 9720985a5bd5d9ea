"""Radial fast/logarithmic diffusion on an annulus, backward Euler + Newton.

The annulus ``[r_in, r_out]`` is discretized uniformly in ``x = log r``.  In
that variable the radial Laplacian has the conservative form

    Laplacian(f) = r**-n * (r**(n-2) f_x)_x,

discretized with face radii ``sqrt(r_i r_{i+1})``.  Each backward-Euler
step solves a tridiagonal nonlinear system whose Jacobian is an M-matrix
(phi_m is increasing), so the scheme is monotone: ordered data give ordered
solutions.  Dirichlet data are imposed at both ends.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .errors import GridMismatch, NewtonDivergence, PositivityLoss
from .params import Params, validate

BoundaryFn = Callable[[float], tuple[float, float]]


@dataclass(frozen=True)
class AnnulusGrid:
    r_in: float
    r_out: float
    nr: int
    t_end: float
    nt: int

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise ValueError("need 0 < r_in < r_out (the origin is excluded)")
        if self.nr < 3 or self.nt < 1:
            raise ValueError("need nr >= 3 and nt >= 1")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")

    @property
    def r(self) -> np.ndarray:
        return np.geomspace(self.r_in, self.r_out, self.nr)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.nt + 1)

    @property
    def dx(self) -> float:
        return float(np.log(self.r_out / self.r_in) / (self.nr - 1))

    @property
    def dt(self) -> float:
        return self.t_end / self.nt

    def coefficients(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(cm, cp) with L(f)_i = cp_i (f_{i+1} - f_i) - cm_i (f_i - f_{i-1})."""
        r = self.r
        face = np.sqrt(r[1:] * r[:-1])
        ri = r[1:-1]
        scale = 1.0 / (ri**n * self.dx**2)
        return face[:-1] ** (n - 2) * scale, face[1:] ** (n - 2) * scale

    def same_as(self, other: "AnnulusGrid") -> bool:
        return (self.r_in, self.r_out, self.nr, self.t_end, self.nt) == (
            other.r_in, other.r_out, other.nr, other.t_end, other.nt)


@dataclass(frozen=True, eq=False)
class ParabolicSolution:
    params: Params
    grid: AnnulusGrid
    u: np.ndarray
    boundary_source: str
    scheme_stats: dict = field(default_factory=dict)

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    @property
    def t(self) -> np.ndarray:
        return self.grid.t


def solve(p: Params, grid: AnnulusGrid, u0, bc: BoundaryFn, *,
          boundary_source: str = "custom", tol: float = 1e-10, maxit: int = 25,
          first_substeps: int = 4, min_dt_fraction: float = 2.0**-14) -> ParabolicSolution:
    """Backward-Euler solve of ``u_t = Laplacian(phi_m(u))`` on the annulus.

    ``bc(t)`` returns the Dirichlet values ``(u(r_in, t), u(r_out, t))``.
    A time level whose Newton iteration fails is redone with twice as many
    equal substeps, down to ``min_dt_fraction * dt``; the first level is
    always split into ``first_substeps`` substeps because initial data may
    be rough.
    """
    validate(p, strict=False).raise_if_invalid()
    u = np.array(u0, dtype=float)
    if u.shape != (grid.nr,):
        raise ValueError(f"initial data must have {grid.nr} nodes")
    if not np.all(u > 0):
        raise ValueError("initial data must be positive")
    cm, cp = grid.coefficients(p.n)
    m = p.m
    dt = grid.dt
    out = np.empty((grid.nt + 1, grid.nr))
    out[0] = u
    stats = {"backend": kernels.BACKEND, "newton_iterations": 0, "max_iterations": 0,
             "max_residual": 0.0, "substeps": 0, "halvings": 0}

    max_split = int(round(1.0 / min_dt_fraction))
    for j in range(1, grid.nt + 1):
        t_start = (j - 1) * dt
        k = first_substeps if j == 1 else 1
        while True:
            status, new = _advance(u, t_start, dt, k, bc, cm, cp, m, tol, maxit, stats)
            if status == 0:
                break
            k *= 2
            stats["halvings"] += 1
            if k > max_split:
                raise NewtonDivergence(
                    f"Newton failed near t = {t_start:.6g} with dt / {k // 2} (status {status})")
        u = new
        out[j] = u
    return ParabolicSolution(p, grid, out, boundary_source, stats)


def _advance(u, t_start, dt, k, bc, cm, cp, m, tol, maxit, stats):
    """Take ``k`` equal substeps from ``t_start``; status is nonzero on Newton failure."""
    h = dt / k
    for i in range(1, k + 1):
        left, right = bc(t_start + i * h)
        guess = u.copy()
        guess[0], guess[-1] = left, right
        status, new, its, res = kernels.implicit_euler_step(u, guess, cm, cp, h, m, tol, maxit)
        stats["newton_iterations"] += its
        if status != 0:
            return status, u
        if not np.all(new > 0):
            raise PositivityLoss(f"nonpositive value at t = {t_start + i * h:.6g}")
        u = new
        stats["substeps"] += 1
        stats["max_iterations"] = max(stats["max_iterations"], its)
        stats["max_residual"] = max(stats["max_residual"], res)
    return 0, u


def default_grid(p: Params, nr: int = 161, t_end: float = 0.5, nt: int = 100) -> AnnulusGrid:
    """Truncated annulus [0.05 T**-beta, 20] used when no radii are given."""
    return AnnulusGrid(0.05 * p.T ** (-p.beta), 20.0, nr, t_end, nt)


def halved_inner_grid(grid: AnnulusGrid) -> AnnulusGrid:
    """Grid with r_in moved to about r_in / 2, keeping every existing node.

    The log spacing is unchanged, so the new inner radius is the node
    ``r_out * exp(-k dx)`` closest to ``r_in / 2``.
    """
    extra = int(round(np.log(2.0) / grid.dx))
    nr = grid.nr + extra
    return AnnulusGrid(grid.r_out * np.exp(-(nr - 1) * grid.dx), grid.r_out, nr,
                       grid.t_end, grid.nt)


def sample_field(field_fn, grid: AnnulusGrid) -> np.ndarray:
    """Evaluate ``field_fn(r, t)`` on every grid node, shape (nt+1, nr)."""
    R, Tt = np.meshgrid(grid.r, grid.t)
    return np.asarray(field_fn(R.ravel(), Tt.ravel()), dtype=float).reshape(R.shape)


def dirichlet_from(field_fn, grid: AnnulusGrid) -> BoundaryFn:
    ends = np.array([grid.r_in, grid.r_out])

    def bc(t: float) -> tuple[float, float]:
        vals = np.asarray(field_fn(ends, np.full(2, t)), dtype=float)
        return float(vals[0]), float(vals[1])
    return bc


def solve_from_field(p: Params, grid: AnnulusGrid, field_fn, source: str, **kw) -> ParabolicSolution:
    """Solve with initial and boundary data sampled from ``field_fn(r, t)``."""
    u0 = np.asarray(field_fn(grid.r, np.zeros(grid.nr)), dtype=float)
    return solve(p, grid, u0, dirichlet_from(field_fn, grid), boundary_source=source, **kw)


def truncation_sensitivity(p: Params, grid: AnnulusGrid, field_fn, window=(0.2, 5.0),
                           **kw) -> float:
    """Max relative change on ``window`` when the inner radius is halved.

    Both runs take initial and boundary data from ``field_fn``; the
    comparison uses the shared nodes of the two grids at every time level.
    """
    wide = halved_inner_grid(grid)
    a = solve_from_field(p, grid, field_fn, "truncation", **kw)
    b = solve_from_field(p, wide, field_fn, "truncation", **kw)
    off = wide.nr - grid.nr
    ub = b.u[:, off:]
    sel = (grid.r >= window[0]) & (grid.r <= window[1])
    return float(np.max(np.abs(ub[:, sel] - a.u[:, sel]) / a.u[:, sel]))


def max_error(sol: ParabolicSolution, exact_fn, relative: bool = True) -> float:
    """L-infinity distance to an exact solution over all nodes and time levels."""
    ex = sample_field(exact_fn, sol.grid)
    diff = np.abs(sol.u - ex)
    if relative:
        diff = diff / ex
    return float(diff.max())


@dataclass(frozen=True)
class SandwichReport:
    t: np.ndarray
    lower_slack: np.ndarray     # per time slice: min over nodes of (u - lower)/lower
    upper_slack: np.ndarray     # per time slice: min over nodes of (upper - u)/upper
    ordered_min_slack: float    # min slack over nodes where lower <= upper
    inverted_nodes: int         # nodes where the envelopes themselves are out of order
    tolerance: float

    @property
    def min_slack(self) -> float:
        return float(min(self.lower_slack.min(), self.upper_slack.min()))

    @property
    def envelopes_ordered(self) -> bool:
        return self.inverted_nodes == 0

    @property
    def ok(self) -> bool:
        return self.min_slack >= -self.tolerance

    @property
    def ok_where_ordered(self) -> bool:
        return self.ordered_min_slack >= -self.tolerance


def check_sandwich(sol: ParabolicSolution, lower, upper, tolerance: float = 0.0) -> SandwichReport:
    """Relative slack of the solution against two space-time envelopes.

    Slack is measured at every node.  Nodes where ``lower > upper`` violate
    the precondition of the sandwich; they are counted and the slack over the
    remaining nodes is reported separately.
    """
    lo = sample_field(lower, sol.grid)
    hi = sample_field(upper, sol.grid)
    sl = (sol.u - lo) / lo
    su = (hi - sol.u) / hi
    ordered = hi >= lo
    both = np.minimum(sl, su)
    ordered_min = float(both[ordered].min()) if ordered.any() else float("nan")
    return SandwichReport(sol.t, sl.min(axis=1), su.min(axis=1), ordered_min,
                          int((~ordered).sum()), tolerance)


@dataclass(frozen=True)
class ComparisonReport:
    min_difference: float       # min over nodes of u_B - u_A
    min_relative: float         # min over nodes of (u_B - u_A) / u_B
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.min_relative >= -self.tolerance


def check_comparison(sol_a: ParabolicSolution, sol_b: ParabolicSolution,
                     tolerance: float = 0.0) -> ComparisonReport:
    if not sol_a.grid.same_as(sol_b.grid):
        raise GridMismatch("solutions live on different grids")
    d = sol_b.u - sol_a.u
    return ComparisonReport(float(d.min()), float((d / sol_b.u).min()), tolerance)
