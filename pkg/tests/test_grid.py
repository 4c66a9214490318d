import math

import numpy as np
import pytest
import sympy as sp

from henle import presets
from henle.exceptions import ConfigError, SolverDivergence
from henle.grid import Grid1D, inflow_samples, run, step_full, step_reduced
from henle.model import Params, ProblemData, State3, State5


def _const_state(N, vals):
    return State5.from_array(np.array([np.full(N, v) for v in vals]))


def test_grid_geometry():
    g = Grid1D(N=10, L=2.0, alpha=4.0, T=1.0)
    assert g.dx == 0.2 and g.dt == pytest.approx(0.05)
    assert g.M == 20
    np.testing.assert_allclose(g.x, 0.1 + 0.2 * np.arange(10))
    with pytest.raises(ConfigError):
        Grid1D(N=1)
    with pytest.raises(ConfigError):
        Grid1D(N=10, alpha=2.0).check(Params())


def test_constant_state_is_steady():
    p = Params(Vm=0.0)
    g = Grid1D.from_params(p, 20)
    s = step_full(_const_state(20, [0.6] * 5), g, p, 0.6)
    np.testing.assert_allclose(s.as_array(), 0.6, rtol=0, atol=1e-15)
    assert s.t == pytest.approx(g.dt)
    r = step_reduced(State3.from_array(np.full((3, 20), 0.6)), g, p, 0.6)
    np.testing.assert_allclose(r.as_array(), 0.6, rtol=0, atol=1e-15)


def test_pure_advection_shifts_one_cell():
    # after the shift u1 != q1 for a non-constant profile, so relaxation is
    # switched off by a huge eps (factor exp(-2 dt / eps) = 1 - 1e-13)
    p = Params(K1=0.0, K2=0.0, Vm=0.0, eps=1e12)
    g = Grid1D.from_params(p, 16)
    u = np.linspace(1.0, 2.5, 16)
    s = State5.from_array(np.array([u, u[::-1], u, u[::-1], np.ones(16)]))
    out = step_full(s, g, p, 0.3)
    np.testing.assert_allclose(out.u1[1:], u[:-1], rtol=1e-12)
    assert out.u1[0] == pytest.approx(0.3, rel=1e-12)
    np.testing.assert_allclose(out.u2[:-1], u[::-1][1:], rtol=1e-12)
    assert out.u2[-1] == pytest.approx(u[-2], rel=1e-12)  # turning: shifted u1 in the last cell


def test_relaxation_matches_two_by_two_exponential():
    p = Params(eps=1e-3, K1=0.0, K2=0.0, Vm=0.0)
    g = Grid1D.from_params(p, 1000)  # dt = 1e-3
    s = _const_state(1000, [1.0, 1.0, 3.0, 2.0, 1.0])
    out = step_full(s, g, p, 1.0)
    # exact solution of u' = (q-u)/eps, q' = (u-q)/eps over dt
    factor = math.exp(-2 * g.dt / p.eps)
    np.testing.assert_allclose(out.q1 - out.u1, 2.0 * factor, rtol=1e-12)
    np.testing.assert_allclose(out.q1 + out.u1, 4.0, rtol=1e-14)
    np.testing.assert_allclose(out.q2 - out.u2, 1.0 * factor, rtol=1e-12)


def test_reduced_advects_at_half_speed():
    p = Params(K1=0.0, K2=0.0, Vm=0.0)
    x = Grid1D.from_params(p, 100).x
    d = ProblemData(lambda y: 1.0 + 0.5 * np.sin(2 * np.pi * y), lambda y: np.ones_like(y),
                    lambda y: 1.0 + 0.5 * np.sin(2 * np.pi * y), lambda y: np.ones_like(y),
                    lambda y: np.ones_like(y), lambda t: 1.0 - 0.5 * np.sin(np.pi * t))
    tr = run(p.with_(T=0.2), d, Grid1D.from_params(p.with_(T=0.2), 100), model="reduced")
    # after t the profile is u0(x - alpha t / 2); upwind diffusion is O(dx)
    exact = 1.0 + 0.5 * np.sin(2 * np.pi * (x - 0.5 * tr.t[-1]))
    inner = x > 0.15
    assert np.abs(tr.data[-1, 0][inner] - exact[inner]).max() < 0.02


def _taylor_oracle():
    """Two-term Taylor expansion in time of the reduced system for smooth
    profiles, with the second derivative from the Gateaux derivative."""
    p = Params(K1=1.3, K2=0.7, Vm=1.0, kM=1.0)
    x, h = sp.symbols("x h")
    U = (1 + sp.Rational(3, 10) * sp.sin(2 * sp.pi * x), 1 + sp.Rational(1, 5) * sp.cos(2 * sp.pi * x),
         sp.Rational(4, 5) + x / 10)

    def G(q):
        return p.Vm * (q / (p.kM + q)) ** 3

    def rhs(u1, u2, u0):
        return (-p.alpha / 2 * sp.diff(u1, x) + p.K1 / 2 * (u0 - u1),
                p.alpha / 2 * sp.diff(u2, x) + (p.K2 * (u0 - u2) - G(u2)) / 2,
                p.K1 * (u1 - u0) + p.K2 * (u2 - u0) + G(u2))

    D1 = rhs(*U)
    D2 = [sp.diff(e, h).subs(h, 0) for e in rhs(*[u + h * v for u, v in zip(U, D1)])]
    return p, [sp.lambdify(x, e, "numpy") for e in (*U, *D1, *D2)]


def test_reduced_local_error_is_second_order():
    p, fs = _taylor_oracle()
    consts = []
    for N in (8, 16, 32, 64):
        g = Grid1D.from_params(p, N)
        xc, dt = g.x, g.dt
        ev = [np.broadcast_to(f(xc), xc.shape).astype(float) for f in fs]
        exact = [ev[i] + dt * ev[3 + i] + 0.5 * dt * dt * ev[6 + i] for i in range(3)]
        out = step_reduced(State3.from_array(np.array(ev[:3])), g, p, float(fs[0](-0.5 * g.dx))).as_array()
        err = max(np.abs(out[i][1:-1] - exact[i][1:-1]).max() for i in range(3))
        consts.append(err / dt**2)
    assert max(consts) <= 2.5
    assert max(consts) / min(consts) < 1.25


def test_zero_horizon_returns_initial_data():
    p = Params(T=0.0)
    d = presets.smooth(p)
    g = Grid1D.from_params(p, 50)
    tr = run(p, d, g)
    assert tr.data.shape == (1, 5, 50)
    np.testing.assert_array_equal(tr.data[0], d.sample(g.x))
    assert len(tr.trace) == 0


def test_well_prepared_constant_run_is_constant():
    p = Params(Vm=0.0)
    tr = run(p, presets.constant(p, 0.9), Grid1D.from_params(p, 40))
    np.testing.assert_allclose(tr.data, 0.9, rtol=0, atol=1e-14)


def test_self_convergence_on_smooth_data():
    p = Params()
    d = presets.smooth(p)

    def final(N):
        return run(p, d, Grid1D.from_params(p, N)).data[-1]

    a, b, c = final(100), final(200), final(400)

    def coarse(f):
        return f.reshape(5, -1, 2).mean(axis=2)

    d1 = np.abs(a - coarse(b)).sum() / 100
    d2 = np.abs(b - coarse(c)).sum() / 200
    assert d1 / d2 == pytest.approx(2.0, rel=0.2)


def test_stride_and_traces():
    p = Params()
    g = Grid1D.from_params(p, 50)
    d = presets.smooth(p)
    full = run(p, d, g)
    sub = run(p, d, g, stride=7)
    steps = np.rint(sub.t / g.dt).astype(int)
    assert steps[-1] == g.M and all(s % 7 == 0 for s in steps[1:-1])
    np.testing.assert_array_equal(sub.data, full.data[steps])
    np.testing.assert_array_equal(full.ub, inflow_samples(d, g))
    np.testing.assert_array_equal(full.u2_at_0, full.data[:-1, 1, 0])
    with pytest.raises(ConfigError):
        run(p, d, g, stride=0)
    with pytest.raises(ConfigError):
        run(p, d, g, model="other")


def test_non_finite_data_raises():
    p = Params()
    d = ProblemData.constant(1.0)
    d.u_b = lambda t: np.full(np.shape(t), np.nan)
    with pytest.raises(SolverDivergence):
        run(p, d, Grid1D.from_params(p, 10))


def test_reduced_initial_reading_option():
    p = Params()
    g = Grid1D.from_params(p, 10)
    d = presets.layer(p)
    a = run(p, d, g, model="reduced", reading="average")
    b = run(p, d, g, model="reduced", reading="sum")
    u1, _, q1, _, _ = d.sample(g.x)
    np.testing.assert_allclose(a.data[0, 0], 0.5 * (u1 + q1))
    np.testing.assert_allclose(b.data[0, 0], u1 + q1)
