# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contract as ``fastdiff._pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, expm1, fabs, isfinite, fmax, fmin, pow

cnp.import_array()

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561
cdef double A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247
cdef double A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192
cdef double B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40


cdef inline double _zdot(double s, double L, double z, double a1, double a2,
                         double a3, double m) nogil:
    return a3 + (1.0 - a1) * z - m * z * z - a2 * z * exp((1.0 - m) * L - s)


cdef int _dp45_chunk(double* st, double s1, double a1, double a2, double a3,
                     double m, double rtol, double atol, double hmax,
                     double floor, long max_steps, long* steps,
                     double[:, ::1] out, long start, long* count) nogil:
    # st = [s, L, z, k1L, k1z, h]; fills rows of out until full or done.
    # Returns 0 done, 1 collapse, 2 budget, -1 buffer full.
    cdef double s = st[0], L = st[1], z = st[2], k1L = st[3], k1z = st[4]
    cdef double h = st[5]
    cdef double k2L, k2z, k3L, k3z, k4L, k4z, k5L, k5z, k6L, k6z, k7L, k7z
    cdef double Ln, zn, sn, errL, errz, err, fac
    cdef long cnt = start
    cdef long cap = out.shape[0]
    cdef bint last
    cdef int status = 0
    while s < s1:
        if cnt >= cap:
            status = -1
            break
        if steps[0] >= max_steps:
            status = 2
            break
        if h < floor:
            status = 1
            break
        last = s + h >= s1
        if last:
            h = s1 - s
        k2L = z + h * A21 * k1z
        k2z = _zdot(s + C2 * h, L + h * A21 * k1L, z + h * A21 * k1z, a1, a2, a3, m)
        k3L = z + h * (A31 * k1z + A32 * k2z)
        k3z = _zdot(s + C3 * h, L + h * (A31 * k1L + A32 * k2L), k3L, a1, a2, a3, m)
        k4L = z + h * (A41 * k1z + A42 * k2z + A43 * k3z)
        k4z = _zdot(s + C4 * h, L + h * (A41 * k1L + A42 * k2L + A43 * k3L),
                    k4L, a1, a2, a3, m)
        k5L = z + h * (A51 * k1z + A52 * k2z + A53 * k3z + A54 * k4z)
        k5z = _zdot(s + C5 * h,
                    L + h * (A51 * k1L + A52 * k2L + A53 * k3L + A54 * k4L),
                    k5L, a1, a2, a3, m)
        k6L = z + h * (A61 * k1z + A62 * k2z + A63 * k3z + A64 * k4z + A65 * k5z)
        k6z = _zdot(s + h,
                    L + h * (A61 * k1L + A62 * k2L + A63 * k3L + A64 * k4L
                             + A65 * k5L),
                    k6L, a1, a2, a3, m)
        Ln = L + h * (B1 * k1L + B3 * k3L + B4 * k4L + B5 * k5L + B6 * k6L)
        zn = z + h * (B1 * k1z + B3 * k3z + B4 * k4z + B5 * k5z + B6 * k6z)
        sn = s1 if last else s + h
        k7L = zn
        k7z = _zdot(sn, Ln, zn, a1, a2, a3, m)
        errL = h * (E1 * k1L + E3 * k3L + E4 * k4L + E5 * k5L + E6 * k6L + E7 * k7L)
        errz = h * (E1 * k1z + E3 * k3z + E4 * k4z + E5 * k5z + E6 * k6z + E7 * k7z)
        err = fmax(fabs(errL) / (atol + rtol * fmax(fabs(L), fabs(Ln))),
                   fabs(errz) / (atol + rtol * fmax(fabs(z), fabs(zn))))
        steps[0] += 1
        if not isfinite(err):
            h *= 0.25
            continue
        if err <= 1.0:
            s = sn
            L = Ln
            z = zn
            k1L = k7L
            k1z = k7z
            out[cnt, 0] = s
            out[cnt, 1] = L
            out[cnt, 2] = z
            out[cnt, 3] = k1L
            out[cnt, 4] = k1z
            cnt += 1
            if err == 0.0:
                fac = 5.0
            else:
                fac = fmin(5.0, 0.9 * pow(err, -0.2))
            h = fmin(hmax, h * fac)
        else:
            h *= fmax(0.2, 0.9 * pow(err, -0.2))
    st[0] = s
    st[1] = L
    st[2] = z
    st[3] = k1L
    st[4] = k1z
    st[5] = h
    count[0] = cnt
    return status


def profile_dp45(double s0, double s1, double L0, double z0, double a1,
                 double a2, double a3, double m, double rtol, double atol,
                 double h0, double hmax, long max_steps):
    cdef double st[6]
    cdef long steps = 0, count = 1
    cdef int status
    cdef double floor = 1e-14 * fmax(1.0, fmax(fabs(s0), fabs(s1)))
    cdef cnp.ndarray[double, ndim=2] buf = np.empty((4096, 5))
    cdef double[:, ::1] out = buf
    st[0] = s0
    st[1] = L0
    st[2] = z0
    st[3] = z0
    st[4] = _zdot(s0, L0, z0, a1, a2, a3, m)
    st[5] = fmin(h0, fmin(hmax, s1 - s0))
    out[0, 0] = s0
    out[0, 1] = L0
    out[0, 2] = z0
    out[0, 3] = st[3]
    out[0, 4] = st[4]
    while True:
        with nogil:
            status = _dp45_chunk(st, s1, a1, a2, a3, m, rtol, atol, hmax,
                                 floor, max_steps, &steps, out, count, &count)
        if status != -1:
            break
        buf = np.concatenate([buf, np.empty_like(buf)])
        out = buf
    res = buf[:count]
    return (status, res[:, 0].copy(), res[:, 1].copy(), res[:, 2].copy(),
            res[:, 3].copy(), res[:, 4].copy())


cdef inline double _phi(double u, double m) nogil:
    cdef double lu = log(u), x = m * lu
    # log(u) * expm1(x)/x stays accurate when m * log(u) underflows
    if x == 0.0:
        return lu
    return lu * (expm1(x) / x)


cdef double _residual(double[::1] w, double[::1] u_old, double[::1] cm,
                      double[::1] cp, double dt, double m, double[::1] F,
                      double[::1] f) nogil:
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double res = 0.0, r, scale
    for i in range(n):
        f[i] = _phi(w[i], m)
    for i in range(1, n - 1):
        r = w[i] - u_old[i] - dt * (cp[i - 1] * (f[i + 1] - f[i])
                                    - cm[i - 1] * (f[i] - f[i - 1]))
        F[i - 1] = r
        # size of the terms being balanced, so rounding stays far below tol
        scale = w[i] + u_old[i] + dt * (cp[i - 1] * (fabs(f[i + 1]) + fabs(f[i]))
                                        + cm[i - 1] * (fabs(f[i]) + fabs(f[i - 1])))
        r = fabs(r) / scale
        if r > res:
            res = r
    return res


def implicit_euler_step(u_old_in, u_guess, cm_in, cp_in, double dt, double m,
                        double tol, long maxit):
    cdef cnp.ndarray[double, ndim=1] u_arr = np.array(u_guess, dtype=float)
    cdef double[::1] u = u_arr
    cdef double[::1] u_old = np.ascontiguousarray(u_old_in, dtype=float)
    cdef double[::1] cm = np.ascontiguousarray(cm_in, dtype=float)
    cdef double[::1] cp = np.ascontiguousarray(cp_in, dtype=float)
    cdef Py_ssize_t n = u.shape[0], ni = n - 2, i, k
    cdef double[::1] F = np.empty(ni)
    cdef double[::1] Ft = np.empty(ni)
    cdef double[::1] f = np.empty(n)
    cdef double[::1] trial = np.empty(n)
    cdef double[::1] dphi = np.empty(n)
    cdef double[::1] delta = np.empty(ni)
    cdef double[::1] cpr = np.empty(ni)
    cdef double[::1] dpr = np.empty(ni)
    cdef double res, rt = 0.0, theta, den, lo, di, up, step, q
    cdef long it = 0
    cdef bint accepted, positive
    cdef int status = 3
    with nogil:
        res = _residual(u, u_old, cm, cp, dt, m, F, f)
        while it < maxit:
            it += 1
            for i in range(n):
                dphi[i] = exp((m - 1.0) * log(u[i]))
            # Thomas forward sweep on -F
            for i in range(ni):
                di = 1.0 + dt * (cp[i] + cm[i]) * dphi[i + 1]
                lo = -dt * cm[i] * dphi[i]
                up = -dt * cp[i] * dphi[i + 2]
                if i == 0:
                    den = di
                    cpr[i] = up / den
                    dpr[i] = -F[i] / den
                else:
                    den = di - lo * cpr[i - 1]
                    cpr[i] = up / den
                    dpr[i] = (-F[i] - lo * dpr[i - 1]) / den
            delta[ni - 1] = dpr[ni - 1]
            for k in range(ni - 2, -1, -1):
                delta[k] = dpr[k] - cpr[k] * delta[k + 1]
            theta = 1.0
            for i in range(ni):
                if delta[i] < 0:
                    q = 0.9 * u[i + 1] / -delta[i]
                    if q < theta:
                        theta = q
            accepted = False
            for k in range(40):
                trial[0] = u[0]
                trial[n - 1] = u[n - 1]
                positive = True
                for i in range(ni):
                    trial[i + 1] = u[i + 1] + theta * delta[i]
                    if trial[i + 1] <= 0:
                        positive = False
                if positive:
                    rt = _residual(trial, u_old, cm, cp, dt, m, Ft, f)
                    if rt <= (1.0 - 1e-4 * theta) * res or rt < tol:
                        accepted = True
                        break
                theta *= 0.5
            if not accepted:
                status = 4
                break
            step = 0.0
            for i in range(ni):
                q = fabs(theta * delta[i]) / u[i + 1]
                if q > step:
                    step = q
            for i in range(n):
                u[i] = trial[i]
            for i in range(ni):
                F[i] = Ft[i]
            res = rt
            if res < tol and step < 1e3 * tol:
                status = 0
                break
    return status, u_arr, it, res
