# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Same signatures and semantics as ``henle._pykernels``."""
from libc.math cimport exp, fabs, copysign, isfinite


cdef inline double _pump(double q, double Vm, double kM) noexcept nogil:
    cdef double m = fabs(q)
    cdef double r = m / (kM + m)
    return copysign(Vm * (r * r * r), q)


def advance_full(double[:, ::1] state, const double[::1] ub, double dt, double eps,
                 double K1, double K2, double Vm, double kM, Py_ssize_t stride,
                 double[:, :, ::1] snaps, double[:, ::1] trace):
    cdef Py_ssize_t n = state.shape[1]
    cdef Py_ssize_t nsteps = ub.shape[0]
    cdef Py_ssize_t k, j, slot = 0, bad = -1
    cdef double e2 = exp(-2.0 * dt / eps)
    cdef double u2_at_0, u_at_L, m, d, g, f1, f2
    cdef double[::1] u1 = state[0]
    cdef double[::1] u2 = state[1]
    cdef double[::1] q1 = state[2]
    cdef double[::1] q2 = state[3]
    cdef double[::1] u0 = state[4]
    cdef bint ok
    with nogil:
        for k in range(nsteps):
            u2_at_0 = u2[0]
            for j in range(n - 1, 0, -1):
                u1[j] = u1[j - 1]
            u1[0] = ub[k]
            u_at_L = u1[n - 1]
            for j in range(n - 1):
                u2[j] = u2[j + 1]
            u2[n - 1] = u_at_L
            ok = True
            for j in range(n):
                m = 0.5 * (u1[j] + q1[j])
                d = (0.5 * (u1[j] - q1[j])) * e2
                u1[j] = m + d
                q1[j] = m - d
                m = 0.5 * (u2[j] + q2[j])
                d = (0.5 * (u2[j] - q2[j])) * e2
                u2[j] = m + d
                q2[j] = m - d
                g = _pump(q2[j], Vm, kM)
                f1 = K1 * (u0[j] - q1[j])
                f2 = K2 * (u0[j] - q2[j])
                q1[j] = q1[j] + dt * f1
                q2[j] = q2[j] + dt * (f2 - g)
                u0[j] = u0[j] + dt * ((g - f1) - f2)
                if not (isfinite(u1[j]) and isfinite(u2[j]) and isfinite(q1[j])
                        and isfinite(q2[j]) and isfinite(u0[j])):
                    ok = False
            trace[k, 0] = u_at_L
            trace[k, 1] = u2_at_0
            trace[k, 2] = ub[k]
            if not ok:
                bad = k
                break
            if (k + 1) % stride == 0 or k + 1 == nsteps:
                for j in range(n):
                    snaps[slot, 0, j] = u1[j]
                    snaps[slot, 1, j] = u2[j]
                    snaps[slot, 2, j] = q1[j]
                    snaps[slot, 3, j] = q2[j]
                    snaps[slot, 4, j] = u0[j]
                slot += 1
    return bad


def advance_reduced(double[:, ::1] state, const double[::1] ub, double dt, double eps,
                    double K1, double K2, double Vm, double kM, Py_ssize_t stride,
                    double[:, :, ::1] snaps, double[:, ::1] trace):
    cdef Py_ssize_t n = state.shape[1]
    cdef Py_ssize_t nsteps = ub.shape[0]
    cdef Py_ssize_t k, j, slot = 0, bad = -1
    cdef double u2_at_0, u_at_L, prev, cur, g, f1, f2
    cdef double[::1] u1 = state[0]
    cdef double[::1] u2 = state[1]
    cdef double[::1] u0 = state[2]
    cdef bint ok
    with nogil:
        for k in range(nsteps):
            u2_at_0 = u2[0]
            u_at_L = u1[n - 2] if n > 1 else ub[k]
            # half-weighted upwind shifts, swept so old neighbours are still available
            for j in range(n - 1, 0, -1):
                u1[j] = 0.5 * (u1[j] + u1[j - 1])
            u1[0] = 0.5 * (u1[0] + ub[k])
            for j in range(n - 1):
                u2[j] = 0.5 * (u2[j] + u2[j + 1])
            u2[n - 1] = 0.5 * (u2[n - 1] + u_at_L)
            ok = True
            for j in range(n):
                g = _pump(u2[j], Vm, kM)
                f1 = K1 * (u0[j] - u1[j])
                f2 = K2 * (u0[j] - u2[j])
                u1[j] = u1[j] + dt * (0.5 * f1)
                u2[j] = u2[j] + dt * (0.5 * (f2 - g))
                u0[j] = u0[j] + dt * ((g - f1) - f2)
                if not (isfinite(u1[j]) and isfinite(u2[j]) and isfinite(u0[j])):
                    ok = False
            trace[k, 0] = u_at_L
            trace[k, 1] = u2_at_0
            trace[k, 2] = ub[k]
            if not ok:
                bad = k
                break
            if (k + 1) % stride == 0 or k + 1 == nsteps:
                for j in range(n):
                    snaps[slot, 0, j] = u1[j]
                    snaps[slot, 1, j] = u2[j]
                    snaps[slot, 2, j] = u0[j]
                slot += 1
    return bad


def picard_sweep(const double[:, :, ::1] prev, double[:, :, ::1] out, const double[::1] ub,
                 double[::1] u_at_L, double inv_eps, double K1, double K2, double Vm,
                 double kM, double Kx, tuple wu, tuple wh, tuple wq1, tuple wq2, tuple wu0):
    cdef double a = wu[0], A0 = wu[1], A1 = wu[2]
    cdef double ah = wh[0], H0 = wh[1], H1 = wh[2]
    cdef double b1 = wq1[0], B10 = wq1[1], B11 = wq1[2]
    cdef double b2 = wq2[0], B20 = wq2[1], B21 = wq2[2]
    cdef double b0 = wu0[0], C0 = wu0[1], C1 = wu0[2]
    cdef Py_ssize_t nw = prev.shape[0] - 1
    cdef Py_ssize_t n = prev.shape[2]
    cdef Py_ssize_t m, j
    cdef double q1e, q1L, q2L, uL, Ga, Gb
    with nogil:
        for m in range(nw):
            for j in range(1, n):
                out[m + 1, 0, j] = (a * out[m, 0, j - 1] + A0 * prev[m, 2, j - 1]
                                    + A1 * prev[m + 1, 2, j])
            q1e = 0.5 * (prev[m, 2, 0] + prev[m + 1, 2, 0])
            out[m + 1, 0, 0] = ah * ub[m] + H0 * q1e + H1 * prev[m + 1, 2, 0]
            q1L = 0.5 * (prev[m, 2, n - 1] + prev[m + 1, 2, n - 1])
            uL = ah * out[m, 0, n - 1] + H0 * prev[m, 2, n - 1] + H1 * q1L
            u_at_L[m] = uL
            for j in range(n - 1):
                out[m + 1, 1, j] = (a * out[m, 1, j + 1] + A0 * prev[m, 3, j + 1]
                                    + A1 * prev[m + 1, 3, j])
            q2L = 0.5 * (prev[m, 3, n - 1] + prev[m + 1, 3, n - 1])
            out[m + 1, 1, n - 1] = ah * uL + H0 * q2L + H1 * prev[m + 1, 3, n - 1]
            for j in range(n):
                Ga = _pump(prev[m, 3, j], Vm, kM)
                Gb = _pump(prev[m + 1, 3, j], Vm, kM)
                out[m + 1, 2, j] = (b1 * out[m, 2, j]
                                    + B10 * (inv_eps * prev[m, 0, j] + K1 * prev[m, 4, j])
                                    + B11 * (inv_eps * prev[m + 1, 0, j] + K1 * prev[m + 1, 4, j]))
                out[m + 1, 3, j] = (b2 * out[m, 3, j]
                                    + B20 * ((inv_eps * prev[m, 1, j] + Kx * prev[m, 4, j]) - Ga)
                                    + B21 * ((inv_eps * prev[m + 1, 1, j] + Kx * prev[m + 1, 4, j]) - Gb))
                out[m + 1, 4, j] = (b0 * out[m, 4, j]
                                    + C0 * ((K1 * prev[m, 2, j] + K2 * prev[m, 3, j]) + Ga)
                                    + C1 * ((K1 * prev[m + 1, 2, j] + K2 * prev[m + 1, 3, j]) + Gb))
