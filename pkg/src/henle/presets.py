"""Named initial/boundary data sets and CSV-backed data."""
from __future__ import annotations

import csv

import numpy as np

from .exceptions import ConfigError
from .model import Params, ProblemData


def _bump(x, center, width):
    """Cosine bump, C1, supported on ``|x - center| < width / 2``, peak 1."""
    s = (np.asarray(x, dtype=float) - center) / width
    return np.where(np.abs(s) < 0.5, 0.5 * (1.0 + np.cos(2.0 * np.pi * s)), 0.0)


def constant(p: Params, value: float = 1.0, **_) -> ProblemData:
    d = ProblemData.constant(value)
    d.name = "constant"
    return d


def step(p: Params, lo: float = 0.5, hi: float = 1.5, **_) -> ProblemData:
    """Jump from ``hi`` to ``lo`` at mid-tubule in every field; inflow ``hi``."""
    L = p.L

    def f(x):
        return np.where(np.asarray(x) < 0.5 * L, hi, lo).astype(float)

    return ProblemData(f, f, f, f, f, lambda t: np.full(np.shape(t), hi), name="step")


def bump(p: Params, base: float = 0.5, height: float = 1.0, **_) -> ProblemData:
    """Well-prepared smooth bumps (``q_i0 = u_i0``), constant inflow equal to ``base``."""
    L = p.L

    def f1(x):
        return base + height * _bump(x, 0.3 * L, 0.3 * L)

    def f2(x):
        return base + 0.5 * height * _bump(x, 0.6 * L, 0.3 * L)

    def f0(x):
        return np.full(np.shape(x), base)

    return ProblemData(f1, f2, f1, f2, f0, lambda t: np.full(np.shape(t), base), name="bump")


def smooth(p: Params, **_) -> ProblemData:
    """Smooth, ill-prepared data with smooth inflow matched at the corner (0, 0)."""
    L, T = p.L, max(p.T, 1e-12)

    def u1(x):
        return 1.0 + 0.5 * np.cos(np.pi * np.asarray(x) / L)

    def u2(x):
        return 1.0 + 0.3 * np.sin(np.pi * np.asarray(x) / L) - 0.5 * np.asarray(x) / L

    def q1(x):
        return 1.2 + 0.2 * np.sin(2 * np.pi * np.asarray(x) / L)

    def q2(x):
        return 0.8 + 0.2 * np.cos(np.pi * np.asarray(x) / L)

    def u0(x):
        return 1.0 + 0.25 * np.asarray(x) / L

    def ub(t):
        return 1.5 - 0.4 * np.sin(np.pi * np.asarray(t) / T) ** 2

    return ProblemData(u1, u2, q1, q2, u0, ub, name="smooth")


def layer(p: Params, **_) -> ProblemData:
    """Ill-prepared data: epithelium offset from the lumen by a smooth non-constant jump."""
    base = smooth(p)
    L = p.L

    def q1(x):
        return base.u1_0(x) + 0.8 + 0.4 * np.sin(np.pi * np.asarray(x) / L)

    def q2(x):
        return np.maximum(base.u2_0(x) - 0.4 + 0.2 * np.cos(np.pi * np.asarray(x) / L), 0.0)

    return ProblemData(base.u1_0, base.u2_0, q1, q2, base.u0_0, base.u_b, name="layer")


def random_bv(p: Params, seed: int = 0, jumps: int = 8, **_) -> ProblemData:
    """Piecewise-constant non-negative fields with ``jumps`` random jumps each."""
    rng = np.random.default_rng(seed)
    L, T = p.L, max(p.T, 1e-12)

    def piecewise(length):
        edges = np.sort(rng.uniform(0.0, length, jumps))
        levels = rng.uniform(0.1, 2.0, jumps + 1)

        def f(x):
            return levels[np.searchsorted(edges, np.asarray(x, dtype=float), side="right")]

        return f

    fs = [piecewise(L) for _ in range(5)]
    ub = piecewise(T)
    d = ProblemData(*fs, ub, name="random-bv")
    d.meta["seed"] = seed
    return d


PRESETS = {
    "constant": constant,
    "step": step,
    "bump": bump,
    "smooth": smooth,
    "layer": layer,
    "random-bv": random_bv,
}


def make(name: str, p: Params, **kw) -> ProblemData:
    try:
        fn = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return fn(p, **kw)


def _read_columns(path, required):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    missing = [c for c in required if c not in rows[0]]
    if missing:
        raise ConfigError(f"{path}: missing columns {missing}")
    try:
        return {c: np.array([float(r[c]) for r in rows]) for c in required}
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _interp(xs, ys):
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    return lambda x: np.interp(np.asarray(x, dtype=float), xs, ys)


def from_files(data_path, ub_path=None, ub_value=None) -> ProblemData:
    """Data from CSV: ``x,u1,u2,q1,q2,u0`` and optionally ``t,ub``.

    Profiles are piecewise-linear interpolants. Without an inflow file the
    inflow is ``ub_value``, or the ``u1`` value at the first node.
    """
    cols = _read_columns(data_path, ("x", "u1", "u2", "q1", "q2", "u0"))
    fs = [_interp(cols["x"], cols[c]) for c in ("u1", "u2", "q1", "q2", "u0")]
    if ub_path is not None:
        b = _read_columns(ub_path, ("t", "ub"))
        ub = _interp(b["t"], b["ub"])
    else:
        c = float(cols["u1"][np.argmin(cols["x"])]) if ub_value is None else float(ub_value)
        ub = lambda t: np.full(np.shape(t), c)  # noqa: E731
    return ProblemData(*fs, ub, name="file")
