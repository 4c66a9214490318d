"""Measured counterparts of the a-priori estimates and the eps -> 0 study.

Space integrals use the midpoint rule on cells; time integrals use left
endpoints, matching the stepper.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError
from .grid import Grid1D, Trajectory, run
from .model import Params, ProblemData, State5, g_sup


def mass_functional(s, g: Grid1D) -> float:
    """Total mass ``int (|u1| + |u2| + |u0| + |q1| + |q2|) dx`` of a five-field state."""
    a = s.as_array() if isinstance(s, State5) else np.asarray(s, dtype=float)
    return float(g.dx * np.abs(a).sum())


def _mass_series(traj: Trajectory) -> np.ndarray:
    a = np.abs(traj.data)
    if traj.model == "full":
        return traj.grid.dx * a.sum(axis=(1, 2))
    # reduced: lumen fields carry the factor 2 of their time derivative
    w = np.array([2.0, 2.0, 1.0])[None, :, None]
    return traj.grid.dx * (w * a).sum(axis=(1, 2))


def _snapshot_steps(traj: Trajectory) -> np.ndarray:
    return np.rint(traj.t / traj.grid.dt).astype(int)


def balance_residual(traj: Trajectory, p: Params, g: Grid1D | None = None) -> np.ndarray:
    """Mass-balance defect per snapshot interval.

    ``H(t_{k+1}) - H(t_k) + dt * alpha * sum(u2(t_n, 0) - u_b(t_n))`` over the
    steps of the interval; with stride 1 this is the per-step residual.
    For reduced trajectories ``H`` weights the lumen fields by 2.
    """
    g = g or traj.grid
    M = len(traj.trace)
    steps = _snapshot_steps(traj)
    if steps[-1] > M:
        raise InputError("trajectory is missing boundary traces")
    H = _mass_series(traj)
    flux = g.dt * p.alpha * (np.abs(traj.u2_at_0) - np.abs(traj.ub))
    cum = np.concatenate([[0.0], np.cumsum(flux)])
    return np.diff(H) + (cum[steps[1:]] - cum[steps[:-1]])


def check_nonneg(traj: Trajectory) -> float:
    """Smallest sample over all snapshots and fields (negative = violation)."""
    return float(traj.data.min())


def kappa(p: Params, d: ProblemData, g: Grid1D, traj: Trajectory | None = None, n: int = 4096) -> float:
    """``max(sup G, sup u_b, sup of the initial data)``.

    Sup norms are taken over a dense sample and over the values the solver
    actually used (initial snapshot and applied inflow) when ``traj`` is given.
    """
    x = (np.arange(n) + 0.5) * (p.L / n)
    t = np.linspace(0.0, max(p.T, g.M * g.dt), n)
    vals = [g_sup(p), float(np.abs(d.sample(x)).max()), float(np.abs(d.boundary(t)).max())]
    if traj is not None:
        vals.append(float(np.abs(traj.data[0]).max()))
        if len(traj.ub):
            vals.append(float(np.abs(traj.ub).max()))
    return max(vals)


def check_linf(traj: Trajectory, p: Params, d: ProblemData) -> float:
    """Largest ratio ``sample / (kappa (1 + t))`` over the trajectory."""
    k = kappa(p, d, traj.grid, traj)
    if k == 0:
        return 0.0 if traj.data.max() <= 0 else math.inf
    per = traj.data.max(axis=(1, 2)) / (k * (1.0 + traj.t))
    return float(per.max())


def total_variation(f) -> float:
    """Discrete total variation ``sum |f[i+1] - f[i]|``."""
    return float(np.sum(np.abs(np.diff(np.asarray(f, dtype=float)))))


def relaxation_gap(traj: Trajectory):
    """Per-snapshot ``||q1 - u1||_L1`` and ``||q2 - u2||_L1`` over space."""
    if traj.model != "full":
        raise InputError("relaxation gap needs a full-system trajectory")
    dx = traj.grid.dx
    g1 = dx * np.abs(traj.field("q1") - traj.field("u1")).sum(axis=1)
    g2 = dx * np.abs(traj.field("q2") - traj.field("u2")).sum(axis=1)
    return g1, g2


def spacetime_l1(a: np.ndarray, traj: Trajectory) -> float:
    """``||a||_{L1((0,T) x (0,L))}`` for per-snapshot fields ``a`` (stride 1)."""
    if traj.stride != 1:
        raise InputError("space-time norms need a trajectory recorded at every step")
    g = traj.grid
    a = np.asarray(a)
    return float(g.dt * g.dx * np.abs(a[:-1]).sum())


@dataclass
class DiagnosticSeries:
    t: np.ndarray
    H: np.ndarray
    min_val: np.ndarray
    max_val: np.ndarray
    tv_x: dict
    tv_t: dict
    balance_residual: np.ndarray
    gaps: tuple | None

    @property
    def tv_total(self) -> np.ndarray:
        return sum(self.tv_x.values())


def diagnose(traj: Trajectory, p: Params) -> DiagnosticSeries:
    """Collect the per-snapshot diagnostics of one trajectory."""
    H = _mass_series(traj)
    tv_x = {n: np.abs(np.diff(traj.field(n), axis=1)).sum(axis=1) for n in traj.names}
    tv_t = {
        n: np.concatenate([[0.0], np.cumsum(traj.grid.dx * np.abs(np.diff(traj.field(n), axis=0)).sum(axis=1))])
        for n in traj.names
    }
    return DiagnosticSeries(
        t=traj.t.copy(),
        H=H,
        min_val=traj.data.min(axis=(1, 2)),
        max_val=traj.data.max(axis=(1, 2)),
        tv_x=tv_x,
        tv_t=tv_t,
        balance_residual=balance_residual(traj, p),
        gaps=relaxation_gap(traj) if traj.model == "full" else None,
    )


# --------------------------------------------------------------------------
# eps -> 0 study


def fit_order(eps, values, exclude_largest: bool = True) -> float | None:
    """Least-squares slope of ``log(values)`` against ``log(eps)``.

    The largest eps is dropped when at least three points are given. Returns
    None when fewer than two usable points remain.
    """
    e = np.asarray(eps, dtype=float)
    v = np.asarray(values, dtype=float)
    if exclude_largest and len(e) >= 3:
        keep = e < e.max()
        e, v = e[keep], v[keep]
    ok = v > 0
    e, v = e[ok], v[ok]
    if len(e) < 2:
        return None
    return float(np.polyfit(np.log(e), np.log(v), 1)[0])


@dataclass
class ConvergenceReport:
    eps_list: list
    gap_q1u1: list = field(default_factory=list)
    gap_q2u2: list = field(default_factory=list)
    dist_u1: list = field(default_factory=list)
    dist_u2: list = field(default_factory=list)
    dist_u0: list = field(default_factory=list)
    fitted_order: dict = field(default_factory=dict)
    error: str | None = None

    QUANTITIES = ("gap_q1u1", "gap_q2u2", "dist_u1", "dist_u2", "dist_u0")

    def rows(self):
        for i, e in enumerate(self.eps_list[: len(self.dist_u0)]):
            yield (e,) + tuple(getattr(self, q)[i] for q in self.QUANTITIES)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HENLE_THREADS", "1")))
    except ValueError:
        return 1


def convergence_study(
    p: Params,
    d: ProblemData,
    g: Grid1D,
    eps_list,
    reading: str = "average",
    threads: int | None = None,
) -> ConvergenceReport:
    """Run the full system for each eps and compare with one reduced run.

    Distances are space-time L1 norms. A failing run stops the study and the
    partial report carries the error message.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InputError("eps_list must be strictly decreasing")
    report = ConvergenceReport(eps_list=eps_list)
    red = run(p, d, g, model="reduced", reading=reading)
    ru1, ru2, ru0 = (red.field(n) for n in ("u1", "u2", "u0"))

    def one(e):
        tr = run(p.with_(eps=e), d, g, model="full")
        return (
            spacetime_l1(tr.field("q1") - tr.field("u1"), tr),
            spacetime_l1(tr.field("q2") - tr.field("u2"), tr),
            spacetime_l1(tr.field("u1") - ru1, tr),
            spacetime_l1(tr.field("u2") - ru2, tr),
            spacetime_l1(tr.field("u0") - ru0, tr),
        )

    nthreads = threads or _threads()
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            futures = [ex.submit(one, e) for e in eps_list]
            results = []
            for f in futures:
                try:
                    results.append(f.result())
                except Exception as exc:  # noqa: BLE001 - partial report
                    report.error = f"{type(exc).__name__}: {exc}"
                    break
    else:
        results = []
        for e in eps_list:
            try:
                results.append(one(e))
            except Exception as exc:  # noqa: BLE001 - partial report
                report.error = f"{type(exc).__name__}: {exc}"
                break
    for row in results:
        for q, v in zip(ConvergenceReport.QUANTITIES, row):
            getattr(report, q).append(v)
    if report.error is None:
        for q in ConvergenceReport.QUANTITIES:
            report.fitted_order[q] = fit_order(eps_list, getattr(report, q))
    return report


# --------------------------------------------------------------------------
# comparison principle and cross-solver check


@dataclass
class ComparisonResult:
    lhs: float
    initial: float
    boundary: float

    @property
    def rhs(self) -> float:
        return self.initial + self.boundary

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def comparison_residual(run1: Trajectory, run2: Trajectory, data1: ProblemData, data2: ProblemData, p: Params):
    """Terms of the L1 comparison estimate for two runs on the same grid.

    ``lhs = ||U1 - U2||_{L1((0,T)x(0,L))}``, ``initial = ||U1(0) - U2(0)||_{L1(0,L)}``
    and ``boundary = alpha ||u_b1 - u_b2||_{L1(0,T)}`` from the applied inflows.
    ``slack = initial + boundary - lhs``.
    """
    g = run1.grid
    if run2.grid != g or run1.data.shape != run2.data.shape:
        raise InputError("runs must share grid and recording")
    diff = run1.data - run2.data
    lhs = spacetime_l1(np.abs(diff).sum(axis=1), run1)
    initial = float(g.dx * np.abs(data1.sample(g.x) - data2.sample(g.x)).sum())
    boundary = float(p.alpha * g.dt * np.abs(run1.ub - run2.ub).sum())
    return ComparisonResult(lhs=lhs, initial=initial, boundary=boundary)


def cross_validate(p: Params, d: ProblemData, g: Grid1D, cfg=None) -> float:
    """Space-time L1 distance (all five fields) between the grid solver and the
    fixed-point solver."""
    from .characteristics import PicardConfig, picard_solve

    a = run(p, d, g, model="full")
    b = picard_solve(d, p, g, cfg or PicardConfig())
    return spacetime_l1(np.abs(a.data - b.data).sum(axis=1), a)


# --------------------------------------------------------------------------
# invariant checks on a parameter matrix


def test_matrix(base: Params | None = None) -> list[Params]:
    """Twelve parameter sets: eps in {1, 1e-1, 1e-2, 1e-4} x K in {0, 1, 10},
    with Vm alternating between 0 and 1 so each K sees both."""
    base = base or Params()
    out = []
    i = 0
    for e in (1.0, 1e-1, 1e-2, 1e-4):
        for k in (0.0, 1.0, 10.0):
            out.append(base.with_(eps=e, K1=k, K2=k, Vm=float(i % 2)))
            i += 1
    return out


test_matrix.__test__ = False  # not a pytest test


@dataclass
class InvariantCheck:
    name: str
    value: float
    limit: float
    passed: bool


def check_invariants(p: Params, d: ProblemData, g: Grid1D, traj: Trajectory | None = None) -> list[InvariantCheck]:
    """Non-negativity, the L-infinity bound and the mass balance on one full run."""
    traj = traj or run(p, d, g, model="full")
    out = []
    mn = check_nonneg(traj)
    out.append(InvariantCheck("nonnegativity", mn, -1e-12, mn >= -1e-12))
    ratio = check_linf(traj, p, d)
    out.append(InvariantCheck("linf_bound", ratio, 1.0 + 1e-9, ratio <= 1.0 + 1e-9))
    res = balance_residual(traj, p)
    worst = float(np.abs(res).max()) if len(res) else 0.0
    # per-step defect is the x = L turning mismatch dx * |u1[N-2] - u1[N-1]|
    tv = float(np.abs(np.diff(traj.data[:, 0], axis=1)).max()) if g.N > 1 else 0.0
    lim = g.dx * tv * traj.stride + 1e-12
    out.append(InvariantCheck("mass_balance", worst, lim, worst <= lim))
    return out
