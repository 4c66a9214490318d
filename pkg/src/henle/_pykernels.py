"""Pure numpy kernels. Same signatures as the compiled ``_ckernels`` module.

State arrays are ``(5, N)`` (full) or ``(3, N)`` (reduced) float64 and are
advanced in place. ``trace`` receives one row per step:
``(u1 at x=L, u2 at x=0, applied inflow)``.
"""
import numpy as np


def _pump(q, Vm, kM):
    m = np.abs(q)
    r = m / (kM + m)
    return np.copysign(Vm * (r * r * r), q)


def advance_full(state, ub, dt, eps, K1, K2, Vm, kM, stride, snaps, trace):
    """Advance the five-field system ``len(ub)`` steps.

    Returns the index of the first step producing a non-finite value, or -1.
    Snapshots are written into ``snaps`` after every ``stride``-th step and
    after the last one.
    """
    u1, u2, q1, q2, u0 = state
    n = u1.shape[0]
    nsteps = ub.shape[0]
    e2 = np.exp(-2.0 * dt / eps)
    slot = 0
    for k in range(nsteps):
        u2_at_0 = u2[0]
        # exact transport at CFL 1
        u1[1:] = u1[:-1].copy()
        u1[0] = ub[k]
        u_at_L = u1[n - 1]
        u2[:-1] = u2[1:].copy()
        u2[n - 1] = u_at_L
        # exact relaxation of the stiff pairs
        m = 0.5 * (u1 + q1)
        d = (0.5 * (u1 - q1)) * e2
        u1[:] = m + d
        q1[:] = m - d
        m = 0.5 * (u2 + q2)
        d = (0.5 * (u2 - q2)) * e2
        u2[:] = m + d
        q2[:] = m - d
        # exchange and pump, one explicit evaluation
        g = _pump(q2, Vm, kM)
        f1 = K1 * (u0 - q1)
        f2 = K2 * (u0 - q2)
        q1 += dt * f1
        q2 += dt * (f2 - g)
        u0 += dt * ((g - f1) - f2)
        trace[k, 0] = u_at_L
        trace[k, 1] = u2_at_0
        trace[k, 2] = ub[k]
        if not np.isfinite(state).all():
            return k
        if (k + 1) % stride == 0 or k + 1 == nsteps:
            snaps[slot] = state
            slot += 1
    return -1


def advance_reduced(state, ub, dt, eps, K1, K2, Vm, kM, stride, snaps, trace):
    """Advance the three-field reduced system ``len(ub)`` steps.

    Lumen transport is at speed alpha/2: the average of the unshifted and the
    one-cell-shifted profile (upwind at Courant number 1/2). ``eps`` is unused.
    """
    u1, u2, u0 = state
    n = u1.shape[0]
    nsteps = ub.shape[0]
    s = np.empty(n)
    slot = 0
    for k in range(nsteps):
        u2_at_0 = u2[0]
        s[1:] = u1[:-1]
        s[0] = ub[k]
        u_at_L = s[n - 1]
        u1[:] = 0.5 * (u1 + s)
        s[:-1] = u2[1:]
        s[n - 1] = u_at_L
        u2[:] = 0.5 * (u2 + s)
        g = _pump(u2, Vm, kM)
        f1 = K1 * (u0 - u1)
        f2 = K2 * (u0 - u2)
        u1 += dt * (0.5 * f1)
        u2 += dt * (0.5 * (f2 - g))
        u0 += dt * ((g - f1) - f2)
        trace[k, 0] = u_at_L
        trace[k, 1] = u2_at_0
        trace[k, 2] = ub[k]
        if not np.isfinite(state).all():
            return k
        if (k + 1) % stride == 0 or k + 1 == nsteps:
            snaps[slot] = state
            slot += 1
    return -1


def picard_sweep(prev, out, ub, u_at_L, inv_eps, K1, K2, Vm, kM, Kx, wu, wh, wq1, wq2, wu0):
    """One application of the fixed-point map on a window of the lattice.

    ``prev`` and ``out`` are ``(w + 1, 5, N)``; ``out[0]`` must already hold
    the window's initial state. ``ub`` holds the inflow at the half steps and
    ``u_at_L`` receives the descending-lumen trace at x = L at the half steps.
    Each ``w*`` argument is ``(decay, weight_left, weight_right)`` of the
    product trapezoid rule for the corresponding exponential kernel; the
    lumen weights already include the ``1/eps`` factor. ``Kx`` is the
    interstitial exchange coefficient used in the q2 equation.
    """
    a, A0, A1 = wu
    ah, H0, H1 = wh
    b1, B10, B11 = wq1
    b2, B20, B21 = wq2
    b0, C0, C1 = wu0
    nw = prev.shape[0] - 1
    n = prev.shape[2]
    G = _pump(prev[:, 3], Vm, kM)
    for m in range(nw):
        P, Q = prev[m], prev[m + 1]
        cur, nxt = out[m], out[m + 1]
        Q1a, Q1b = P[2], Q[2]
        Q2a, Q2b = P[3], Q[3]
        # descending lumen along rightward characteristics
        nxt[0, 1:] = a * cur[0, :-1] + A0 * Q1a[:-1] + A1 * Q1b[1:]
        q1e = 0.5 * (Q1a[0] + Q1b[0])
        nxt[0, 0] = ah * ub[m] + H0 * q1e + H1 * Q1b[0]
        q1L = 0.5 * (Q1a[n - 1] + Q1b[n - 1])
        uL = ah * cur[0, n - 1] + H0 * Q1a[n - 1] + H1 * q1L
        u_at_L[m] = uL
        # ascending lumen along leftward characteristics
        nxt[1, :-1] = a * cur[1, 1:] + A0 * Q2a[1:] + A1 * Q2b[:-1]
        q2L = 0.5 * (Q2a[n - 1] + Q2b[n - 1])
        nxt[1, n - 1] = ah * uL + H0 * q2L + H1 * Q2b[n - 1]
        # pointwise exponential-kernel ODEs
        F1a = inv_eps * P[0] + K1 * P[4]
        F1b = inv_eps * Q[0] + K1 * Q[4]
        nxt[2] = b1 * cur[2] + B10 * F1a + B11 * F1b
        F2a = (inv_eps * P[1] + Kx * P[4]) - G[m]
        F2b = (inv_eps * Q[1] + Kx * Q[4]) - G[m + 1]
        nxt[3] = b2 * cur[3] + B20 * F2a + B21 * F2b
        F0a = (K1 * P[2] + K2 * P[3]) + G[m]
        F0b = (K1 * Q[2] + K2 * Q[3]) + G[m + 1]
        nxt[4] = b0 * cur[4] + C0 * F0a + C1 * F0b
