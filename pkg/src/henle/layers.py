"""Limit initial data, initial-layer correctors and BV data regularisation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .model import Params, ProblemData, State5

READINGS = ("average", "sum")


def build_limit_initial(d: ProblemData, x: np.ndarray, reading: str = "average"):
    """Initial values of the reduced system at points ``x``.

    ``reading="average"`` gives ``(u_i0 + q_i0) / 2``, the value that the
    conserved sum ``u_i + q_i`` relaxes to. ``reading="sum"`` returns the
    plain sums ``u_i0 + q_i0``.
    """
    if reading not in READINGS:
        raise ConfigError(f"reading must be one of {READINGS}, got {reading!r}")
    u1, u2, q1, q2, u0 = d.sample(x)
    if reading == "average":
        return 0.5 * (u1 + q1), 0.5 * (u2 + q2), u0
    return u1 + q1, u2 + q2, u0


@dataclass
class LayerState:
    """Initial-layer correctors at microscopic time ``tau`` (per cell)."""

    u1t: np.ndarray
    u2t: np.ndarray
    q1t: np.ndarray
    q2t: np.ndarray
    tau: float


def layer_eval(tau: float, d: ProblemData, x: np.ndarray) -> LayerState:
    """Closed-form correctors: the lumen part starts at ``q_i0 - u_i0``, the
    epithelial part at zero, and their difference decays like ``exp(-2 tau)``."""
    if tau < 0:
        raise ConfigError("tau must be >= 0")
    u1, u2, q1, q2, _ = d.sample(x)
    e = np.exp(-2.0 * tau)
    j1 = q1 - u1
    j2 = q2 - u2
    return LayerState(
        u1t=0.5 * j1 * (1.0 + e),
        u2t=0.5 * j2 * (1.0 + e),
        q1t=0.5 * j1 * (1.0 - e),
        q2t=0.5 * j2 * (1.0 - e),
        tau=float(tau),
    )


def corrected_state(s: State5, d: ProblemData, p: Params):
    """Return ``(v1, v2, r1, r2, u0)``: the raw fields plus correctors at ``t / eps``."""
    x = (np.arange(s.N) + 0.5) * (p.L / s.N)
    ly = layer_eval(s.t / p.eps, d, x)
    return s.u1 + ly.u1t, s.u2 + ly.u2t, s.q1 + ly.q1t, s.q2 + ly.q2t, s.u0.copy()


# --------------------------------------------------------------------------
# regularisation


@dataclass(frozen=True)
class RegularizationParams:
    delta: float
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigError("delta must be > 0")
        if self.c1 < 0 or self.c2 < 0:
            raise ConfigError("matching constants c1, c2 must be >= 0")

    def check(self, p: Params) -> None:
        if not self.delta < min(p.L, p.T) / 4:
            raise ConfigError(
                f"delta={self.delta} too large for domain: needs delta < min(L, T)/4 = {min(p.L, p.T) / 4}"
            )


def smooth_cutoff(s) -> np.ndarray:
    """C-infinity even cutoff: 1 for ``|s| <= 1``, 0 for ``|s| >= 2``, monotone in between."""
    z = 2.0 - np.abs(np.asarray(s, dtype=float))  # 1 at |s|=1, 0 at |s|=2

    def h(v):
        out = np.zeros_like(v)
        pos = v > 0
        out[pos] = np.exp(-1.0 / v[pos])
        return out

    zc = np.clip(z, 0.0, 1.0)
    a, b = h(zc), h(1.0 - zc)
    return a / (a + b)


def cosine_kernel(h: float, delta: float) -> np.ndarray:
    """Discrete cosine bump of total width ``delta`` on spacing ``h``, unit sum."""
    r = int(round(0.5 * delta / h))
    y = np.arange(-r, r + 1) * h
    w = 1.0 + np.cos(2.0 * np.pi * y / delta)
    return w / w.sum()


def total_variation(f) -> float:
    return float(np.sum(np.abs(np.diff(np.asarray(f, dtype=float)))))


def default_matching(d: ProblemData, p: Params, n: int = 4096) -> float:
    """Matching constant ``TV(initial data) + TV(u_b)`` measured on ``n`` samples."""
    x = (np.arange(n) + 0.5) * (p.L / n)
    t = (np.arange(n) + 0.5) * (p.T / n)
    tv = sum(total_variation(row) for row in d.sample(x))
    return tv + total_variation(d.boundary(t))


class _Mollified:
    """Piecewise-linear interpolant of a mollified fine-grid profile."""

    def __init__(self, xs, values, blend_values):
        self.xs = xs
        self.values = values
        self.blend_values = blend_values

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.values)


def _mollify(f, lo, hi, blend, delta, h, zones):
    """Sample ``blend`` on ``[lo - delta, hi + delta]``, convolve with the cosine
    kernel and snap each ``(a, b, c)`` zone, where the blend is identically ``c``
    within a kernel half-width, to exactly ``c``."""
    pad = delta
    n = int(np.ceil((hi - lo + 2 * pad) / h)) + 1
    xs = lo - pad + np.arange(n) * h
    inside = np.clip(xs, lo, hi)
    b = blend(inside, f(inside))
    k = cosine_kernel(h, delta)
    r = len(k) // 2
    bp = np.concatenate([np.full(r, b[0]), b, np.full(r, b[-1])])
    out = np.convolve(bp, k, mode="valid")
    for a, bnd, c in zones:
        out[(xs >= a) & (xs <= bnd)] = c
    keep = (xs >= lo - 1e-12) & (xs <= hi + 1e-12)
    return _Mollified(xs[keep], out[keep], b[keep])


def regularize(d: ProblemData, r: RegularizationParams, p: Params, resolution: int = 100) -> ProblemData:
    """Smooth the data: blend toward ``c1``/``c2`` near the tubule ends and near
    ``t = 0``, then mollify with a cosine bump of width ``delta``.

    The blends use ``smooth_cutoff(x / delta)``, which is 1 on ``[0, delta]``;
    the result equals the matching constant exactly on the inner half of each
    such zone. ``resolution`` is the number of fine-grid points per ``delta``.
    """
    r.check(p)
    delta, c1, c2, L, T = r.delta, r.c1, r.c2, p.L, p.T
    h = delta / resolution
    half = 0.5 * delta

    def chi(s):
        return smooth_cutoff(s / delta)

    def blend_u1(x, v):
        a, b = chi(x), chi(L - x)
        return (1.0 - a - b) * v + c1 * a + c2 * b

    def blend_u2(x, v):
        b = chi(L - x)
        return (1.0 - b) * v + c2 * b

    def blend_ub(t, v):
        a = chi(t)
        return (1.0 - a) * v + c1 * a

    def plain(x, v):
        return v

    mol = lambda f, blend, hi, zones: _mollify(f, 0.0, hi, blend, delta, h, zones)  # noqa: E731
    return ProblemData(
        u1_0=mol(d.u1_0, blend_u1, L, [(-np.inf, half, c1), (L - half, np.inf, c2)]),
        u2_0=mol(d.u2_0, blend_u2, L, [(L - half, np.inf, c2)]),
        q1_0=mol(d.q1_0, plain, L, []),
        q2_0=mol(d.q2_0, plain, L, []),
        u0_0=mol(d.u0_0, plain, L, []),
        u_b=mol(d.u_b, blend_ub, T, [(-np.inf, half, c1)]),
        name=f"{d.name}+reg",
        meta={**d.meta, "delta": delta, "c1": c1, "c2": c2},
    )
