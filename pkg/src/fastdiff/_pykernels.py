"""Pure-Python kernels; the reference implementation of ``_ckernels.pyx``.

Both modules expose the same two entry points with identical signatures and
return conventions:

``profile_dp45``
    adaptive Dormand-Prince 5(4) integration of the desingularized profile
    system in ``s = log(rho)``; state is ``L = log(wbar)`` and
    ``z = rho * wbar_rho / wbar``.
``implicit_euler_step``
    one backward-Euler step of the conservative radial scheme, solved by
    damped Newton with a tridiagonal (Thomas) linear solve.

Status codes: 0 success, 1 step size collapsed, 2 step budget exhausted,
3 Newton did not converge, 4 no positive step along the Newton direction.
"""
from __future__ import annotations

import math

import numpy as np

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176,
                           -5103 / 18656)
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)


def _rhs(s, L, z, a1, a2, a3, m):
    return z, a3 + (1.0 - a1) * z - m * z * z - a2 * z * math.exp((1.0 - m) * L - s)


def profile_dp45(s0, s1, L0, z0, a1, a2, a3, m, rtol, atol, h0, hmax,
                 max_steps):
    """Integrate from s0 to s1; returns (status, s, L, z, dL, dz)."""
    cap = 1024
    S = np.empty(cap)
    LL = np.empty(cap)
    ZZ = np.empty(cap)
    DL = np.empty(cap)
    DZ = np.empty(cap)

    s, L, z = s0, L0, z0
    k1L, k1z = _rhs(s, L, z, a1, a2, a3, m)
    S[0], LL[0], ZZ[0], DL[0], DZ[0] = s, L, z, k1L, k1z
    count = 1
    h = min(h0, hmax, s1 - s0)
    floor = 1e-14 * max(1.0, abs(s0), abs(s1))
    steps = 0
    status = 0
    while s < s1:
        if steps >= max_steps:
            status = 2
            break
        if h < floor:
            status = 1
            break
        last = s + h >= s1
        if last:
            h = s1 - s
        k2L, k2z = _rhs(s + C2 * h, L + h * A21 * k1L, z + h * A21 * k1z,
                        a1, a2, a3, m)
        k3L, k3z = _rhs(s + C3 * h, L + h * (A31 * k1L + A32 * k2L),
                        z + h * (A31 * k1z + A32 * k2z), a1, a2, a3, m)
        k4L, k4z = _rhs(s + C4 * h,
                        L + h * (A41 * k1L + A42 * k2L + A43 * k3L),
                        z + h * (A41 * k1z + A42 * k2z + A43 * k3z),
                        a1, a2, a3, m)
        k5L, k5z = _rhs(s + C5 * h,
                        L + h * (A51 * k1L + A52 * k2L + A53 * k3L + A54 * k4L),
                        z + h * (A51 * k1z + A52 * k2z + A53 * k3z + A54 * k4z),
                        a1, a2, a3, m)
        k6L, k6z = _rhs(s + h,
                        L + h * (A61 * k1L + A62 * k2L + A63 * k3L + A64 * k4L
                                 + A65 * k5L),
                        z + h * (A61 * k1z + A62 * k2z + A63 * k3z + A64 * k4z
                                 + A65 * k5z),
                        a1, a2, a3, m)
        Ln = L + h * (B1 * k1L + B3 * k3L + B4 * k4L + B5 * k5L + B6 * k6L)
        zn = z + h * (B1 * k1z + B3 * k3z + B4 * k4z + B5 * k5z + B6 * k6z)
        sn = s1 if last else s + h
        k7L, k7z = _rhs(sn, Ln, zn, a1, a2, a3, m)
        errL = h * (E1 * k1L + E3 * k3L + E4 * k4L + E5 * k5L + E6 * k6L
                    + E7 * k7L)
        errz = h * (E1 * k1z + E3 * k3z + E4 * k4z + E5 * k5z + E6 * k6z
                    + E7 * k7z)
        scL = atol + rtol * max(abs(L), abs(Ln))
        scz = atol + rtol * max(abs(z), abs(zn))
        err = max(abs(errL) / scL, abs(errz) / scz)
        steps += 1
        if not math.isfinite(err):
            h *= 0.25
            continue
        if err <= 1.0:
            s, L, z = sn, Ln, zn
            k1L, k1z = k7L, k7z
            if count == cap:
                cap *= 2
                S, LL, ZZ, DL, DZ = (np.resize(a, cap) for a in (S, LL, ZZ, DL, DZ))
            S[count], LL[count], ZZ[count] = s, L, z
            DL[count], DZ[count] = k1L, k1z
            count += 1
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
            h = min(hmax, h * fac)
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    return (status, S[:count].copy(), LL[:count].copy(), ZZ[:count].copy(),
            DL[:count].copy(), DZ[:count].copy())


def _phi(u, m):
    lu = np.log(u)
    x = m * lu
    # log(u) * expm1(x)/x stays accurate when m * log(u) underflows
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(x == 0.0, lu, lu * (np.expm1(x) / np.where(x == 0.0, 1.0, x)))


def _thomas(lo, di, up, rhs):
    n = len(di)
    cp = [0.0] * n
    dp = [0.0] * n
    cp[0] = up[0] / di[0]
    dp[0] = rhs[0] / di[0]
    for i in range(1, n):
        den = di[i] - lo[i] * cp[i - 1]
        cp[i] = up[i] / den
        dp[i] = (rhs[i] - lo[i] * dp[i - 1]) / den
    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)


def implicit_euler_step(u_old, u_guess, cm, cp, dt, m, tol, maxit):
    """Solve u - u_old = dt * L(phi_m(u)) on interior nodes.

    ``u_guess`` carries the new Dirichlet values in its first and last entry;
    ``cm``/``cp`` are the interior coupling coefficients so that
    ``L(f)_i = cp_i (f_{i+1} - f_i) - cm_i (f_i - f_{i-1})``.
    Returns (status, u, iterations, scaled residual); each residual entry is
    divided by the magnitude of the terms it balances.
    """
    u = np.array(u_guess, dtype=float)
    u_old = np.asarray(u_old, dtype=float)
    cm = np.asarray(cm, dtype=float)
    cp = np.asarray(cp, dtype=float)

    def residual(w):
        f = _phi(w, m)
        flux = cp * (f[2:] - f[1:-1]) - cm * (f[1:-1] - f[:-2])
        F = w[1:-1] - u_old[1:-1] - dt * flux
        # size of the terms being balanced, so rounding stays far below tol
        af = np.abs(f)
        scale = w[1:-1] + u_old[1:-1] + dt * (cp * (af[2:] + af[1:-1]) + cm * (af[1:-1] + af[:-2]))
        return F, float(np.max(np.abs(F) / scale))

    F, res = residual(u)
    it = 0
    while it < maxit:
        it += 1
        dphi = np.exp((m - 1.0) * np.log(u))
        di = 1.0 + dt * (cp + cm) * dphi[1:-1]
        lo = -dt * cm * dphi[:-2]
        up = -dt * cp * dphi[2:]
        delta = _thomas(lo, di, up, -F)
        theta = 1.0
        neg = delta < 0
        if np.any(neg):
            theta = min(1.0, 0.9 * float(np.min(u[1:-1][neg] / -delta[neg])))
        accepted = False
        for _ in range(40):
            trial = u.copy()
            trial[1:-1] = u[1:-1] + theta * delta
            if np.all(trial[1:-1] > 0):
                Ft, rt = residual(trial)
                if rt <= (1.0 - 1e-4 * theta) * res or rt < tol:
                    accepted = True
                    break
            theta *= 0.5
        if not accepted:
            return 4, u, it, res
        step = float(np.max(np.abs(theta * delta) / u[1:-1]))
        u, F, res = trial, Ft, rt
        if res < tol and step < 1e3 * tol:
            return 0, u, it, res
    return 3, u, it, res
