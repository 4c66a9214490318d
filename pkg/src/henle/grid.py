"""Characteristic-aligned time stepper for the full and the reduced system.

The time step is ``dt = dx / alpha`` so lumen transport is an index shift.
Per step of the five-field system:

1. shift ``u1`` one cell right (inflow ``u_b``) and ``u2`` one cell left, the
   ``u2`` inflow being the shifted ``u1`` value in the last cell;
2. relax each lumen/epithelium pair exactly over ``dt``
   (``u - q`` decays like ``exp(-2 dt / eps)``, ``u + q`` is conserved);
3. apply the interstitial exchange and the pump with one explicit step at the
   relaxed values.

The reduced system moves its lumen fields at ``alpha / 2``; a step averages the
unshifted and the shifted profile, which is the ``eps -> 0`` limit of the
full update.

The explicit exchange step keeps every field non-negative as long as
``dt * (K1 + K2) <= 1`` and ``dt * (K2 + 4 Vm / (27 kM)) <= 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .exceptions import ConfigError, SolverDivergence
from .model import FIELDS_FULL, FIELDS_REDUCED, Params, ProblemData, State3, State5


@dataclass(frozen=True)
class Grid1D:
    N: int
    L: float = 1.0
    alpha: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ConfigError(f"grid needs N >= 2 cells, got {self.N!r}")

    @classmethod
    def from_params(cls, p: Params, N: int) -> "Grid1D":
        return cls(int(N), p.L, p.alpha, p.T)

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def dt(self) -> float:
        return self.dx / self.alpha

    @property
    def M(self) -> int:
        """Number of steps; ``M * dt >= T`` up to round-off in ``T / dt``."""
        return max(0, math.ceil(self.T / self.dt - 1e-9))

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.dx

    def check(self, p: Params) -> None:
        """Reject a grid whose step does not put characteristics on cell centres."""
        if abs(self.L - p.L) > 1e-12 * p.L or abs(self.dt * p.alpha - self.dx) > 1e-12 * self.dx:
            raise ConfigError(
                f"grid (L={self.L}, alpha={self.alpha}) is not CFL-aligned with params "
                f"(L={p.L}, alpha={p.alpha})"
            )


@dataclass
class Trajectory:
    """Snapshots of a run plus per-step boundary traces.

    ``data`` has shape ``(n_snap, n_fields, N)``; ``trace`` has one row per step
    with ``(u1 at x=L, u2 at x=0, applied inflow)`` and ``trace_t`` the step
    start times.
    """

    model: str
    t: np.ndarray
    data: np.ndarray
    trace_t: np.ndarray
    trace: np.ndarray
    grid: Grid1D
    stride: int = 1
    info: dict = field(default_factory=dict)

    @property
    def names(self):
        return FIELDS_FULL if self.model == "full" else FIELDS_REDUCED

    def field(self, name: str) -> np.ndarray:
        return self.data[:, self.names.index(name)]

    @property
    def u1_at_L(self):
        return self.trace[:, 0]

    @property
    def u2_at_0(self):
        return self.trace[:, 1]

    @property
    def ub(self):
        return self.trace[:, 2]

    def state(self, k: int = -1):
        cls = State5 if self.model == "full" else State3
        return cls.from_array(self.data[k], t=float(self.t[k]))


def _check_state(s, p: Params, g: Grid1D):
    g.check(p)
    if s.N != g.N:
        raise ConfigError(f"state has {s.N} cells, grid has {g.N}")


def _one_step(kern_name, arr, ub_now, g, p):
    kern = getattr(_backend.kernels, kern_name)
    snaps = np.empty((1,) + arr.shape)
    trace = np.empty((1, 3))
    bad = kern(arr, np.array([ub_now], dtype=float), g.dt, p.eps, p.K1, p.K2, p.Vm, p.kM, 1, snaps, trace)
    if bad >= 0:
        raise SolverDivergence("non-finite value produced in a single step")
    return arr


def step_full(s: State5, g: Grid1D, p: Params, ub_now: float) -> State5:
    """Advance a five-field state by one step ``dt``."""
    _check_state(s, p, g)
    arr = np.ascontiguousarray(s.as_array())
    _one_step("advance_full", arr, ub_now, g, p)
    return State5.from_array(arr, t=s.t + g.dt)


def step_reduced(s: State3, g: Grid1D, p: Params, ub_now: float) -> State3:
    """Advance a reduced state by one step ``dt``."""
    _check_state(s, p, g)
    arr = np.ascontiguousarray(s.as_array())
    _one_step("advance_reduced", arr, ub_now, g, p)
    return State3.from_array(arr, t=s.t + g.dt)


def inflow_samples(d: ProblemData, g: Grid1D, nsteps: int | None = None) -> np.ndarray:
    """Inflow applied at each step: ``u_b`` where the characteristic entering
    cell 0 crosses x = 0, i.e. at the half step."""
    n = g.M if nsteps is None else nsteps
    return np.ascontiguousarray(d.boundary((np.arange(n) + 0.5) * g.dt), dtype=float)


def initial_array(d: ProblemData, g: Grid1D, model: str, reading: str = "average") -> np.ndarray:
    """Initial cell values; for the reduced model see ``layers.build_limit_initial``."""
    if model == "full":
        return np.ascontiguousarray(d.sample(g.x))
    from .layers import build_limit_initial

    return np.ascontiguousarray(np.stack(build_limit_initial(d, g.x, reading=reading)))


def run(
    p: Params,
    d: ProblemData,
    g: Grid1D,
    model: str = "full",
    stride: int = 1,
    reading: str = "average",
    backend: str | None = None,
) -> Trajectory:
    """Integrate from 0 to ``g.M * g.dt`` and record snapshots every ``stride`` steps.

    The last step is always recorded. Raises ``SolverDivergence`` when a
    non-finite value appears.
    """
    if model not in ("full", "reduced"):
        raise ConfigError(f"model must be 'full' or 'reduced', got {model!r}")
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    g.check(p)
    kern = getattr(_backend.get(backend), "advance_full" if model == "full" else "advance_reduced")
    state = initial_array(d, g, model, reading)
    if not np.all(np.isfinite(state)):
        raise SolverDivergence("initial data contains non-finite values")
    M = g.M
    ub = inflow_samples(d, g, M)
    if M > 0 and not np.all(np.isfinite(ub)):
        raise SolverDivergence("boundary data contains non-finite values")
    steps = [k for k in range(1, M + 1) if k % stride == 0 or k == M]
    snaps = np.empty((1 + len(steps),) + state.shape)
    snaps[0] = state
    trace = np.empty((M, 3))
    bad = kern(state, ub, g.dt, p.eps, p.K1, p.K2, p.Vm, p.kM, int(stride), snaps[1:], trace)
    if bad >= 0:
        raise SolverDivergence(
            f"{model} run produced a non-finite value at step {bad} (t = {bad * g.dt:.6g}); "
            f"params {p}"
        )
    t = np.array([0.0] + [k * g.dt for k in steps])
    return Trajectory(
        model=model,
        t=t,
        data=snaps,
        trace_t=np.arange(M) * g.dt,
        trace=trace,
        grid=g,
        stride=int(stride),
        info={"backend": kern.__module__.rsplit(".", 1)[-1], "reading": reading},
    )
