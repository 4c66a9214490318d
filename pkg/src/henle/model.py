"""Model parameters, the Michaelis-Menten pump and pointwise source terms.

Field layout used everywhere in the package (row index of a ``(5, N)`` state
array)::

    0  u1   descending lumen
    1  u2   ascending lumen
    2  q1   descending epithelium
    3  q2   ascending epithelium
    4  u0   interstitium

The reduced (three-field) model uses rows ``u1, u2, u0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .exceptions import ConfigError, DomainError

FIELDS_FULL = ("u1", "u2", "q1", "q2", "u0")
FIELDS_REDUCED = ("u1", "u2", "u0")

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Params:
    """Physical and numerical constants.

    The lumen-epithelium exchange rate is ``1/eps`` in both tubules.
    Defaults are conventions (unit magnitudes), not measured values.
    """

    alpha: float = 1.0
    K1: float = 1.0
    K2: float = 1.0
    eps: float = 0.1
    Vm: float = 1.0
    kM: float = 1.0
    L: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "K1", "K2", "eps", "Vm", "kM", "L", "T"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"parameter {name} must be a finite number, got {v!r}")
        if self.alpha <= 0:
            raise ConfigError("alpha must be > 0")
        if self.K1 < 0 or self.K2 < 0:
            raise ConfigError("K1 and K2 must be >= 0")
        if self.eps <= 0:
            raise ConfigError("eps must be > 0")
        if self.Vm < 0:
            raise ConfigError("Vm must be >= 0")
        if self.kM <= 0:
            raise ConfigError("kM must be > 0")
        if self.L <= 0:
            raise ConfigError("L must be > 0")
        if self.T < 0:
            raise ConfigError("T must be >= 0")

    def with_(self, **kw) -> "Params":
        return replace(self, **kw)

    @property
    def eta(self) -> float:
        """Contraction rate ``K1 + K2 + 1/eps`` of the fixed-point map."""
        return self.K1 + self.K2 + 1.0 / self.eps


def _check_finite(q):
    a = np.asarray(q, dtype=float)
    if not np.all(np.isfinite(a)):
        raise DomainError("pump law evaluated at a non-finite concentration")
    return a


def eval_G(q, p: Params):
    """Pump rate ``Vm * (q / (kM + q))**3``, extended as an odd function.

    Works on scalars and arrays.
    """
    a = _check_finite(q)
    m = np.abs(a)
    r = m / (p.kM + m)
    g = p.Vm * (r * r * r)
    out = np.copysign(g, a)
    return float(out) if out.ndim == 0 else out


def eval_G_prime(q, p: Params):
    """Derivative of the extended pump law (an even function)."""
    a = _check_finite(q)
    m = np.abs(a)
    s = 1.0 / (p.kM + m)
    r = m * s
    out = 3.0 * p.Vm * p.kM * (r * r) * (s * s)
    return float(out) if out.ndim == 0 else out


def g_sup(p: Params) -> float:
    """``sup |G|`` over the real line (not attained)."""
    return float(p.Vm)


def g_prime_sup(p: Params) -> float:
    """``sup G'``; attained at ``q = kM`` and equal to ``3 Vm / (16 kM)``."""
    return 3.0 * p.Vm / (16.0 * p.kM)


def source_rates_full(u1, u2, q1, q2, u0, p: Params):
    """Right-hand sides of the five-field system (transport excluded)."""
    g = eval_G(q2, p)
    inv = 1.0 / p.eps
    r_u1 = (q1 - u1) * inv
    r_u2 = (q2 - u2) * inv
    r_q1 = (u1 - q1) * inv + p.K1 * (u0 - q1)
    r_q2 = (u2 - q2) * inv + p.K2 * (u0 - q2) - g
    r_u0 = p.K1 * (q1 - u0) + p.K2 * (q2 - u0) + g
    return r_u1, r_u2, r_q1, r_q2, r_u0


def source_rates_reduced(u1, u2, u0, p: Params):
    """Time-derivative contributions of the reduced system.

    The lumen rates are already divided by the factor 2 carried by their
    time derivative, so ``2*(r1 + r2) + r0 == 0``.
    """
    g = eval_G(u2, p)
    r1 = 0.5 * p.K1 * (u0 - u1)
    r2 = 0.5 * (p.K2 * (u0 - u2) - g)
    r0 = p.K1 * (u1 - u0) + p.K2 * (u2 - u0) + g
    return r1, r2, r0


def _const(c: float) -> Profile:
    def f(x):
        return np.full(np.shape(x), float(c))

    f.const = float(c)
    return f


@dataclass
class ProblemData:
    """Initial profiles on ``[0, L]`` and the inflow trace on ``[0, T]``.

    Every entry is a vectorised callable. ``sample`` evaluates the profiles
    at cell centres.
    """

    u1_0: Profile
    u2_0: Profile
    q1_0: Profile
    q2_0: Profile
    u0_0: Profile
    u_b: Profile
    name: str = "custom"
    meta: dict = field(default_factory=dict)

    @classmethod
    def constant(cls, c: float, ub: float | None = None) -> "ProblemData":
        f = _const(c)
        return cls(f, f, f, f, f, _const(c if ub is None else ub), name="constant")

    def profiles(self):
        return (self.u1_0, self.u2_0, self.q1_0, self.q2_0, self.u0_0)

    def sample(self, x: np.ndarray) -> np.ndarray:
        """Return a ``(5, len(x))`` array of initial values."""
        x = np.asarray(x, dtype=float)
        return np.stack([np.broadcast_to(np.asarray(f(x), float), x.shape) for f in self.profiles()])

    def boundary(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self.u_b(t), float), t.shape).copy()


@dataclass
class State5:
    u1: np.ndarray
    u2: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    u0: np.ndarray
    t: float = 0.0

    @classmethod
    def from_array(cls, a: np.ndarray, t: float = 0.0) -> "State5":
        a = np.asarray(a, dtype=float)
        return cls(*(a[i].copy() for i in range(5)), t=t)

    def as_array(self) -> np.ndarray:
        return np.stack([self.u1, self.u2, self.q1, self.q2, self.u0]).astype(float)

    @property
    def N(self) -> int:
        return len(self.u1)


@dataclass
class State3:
    u1: np.ndarray
    u2: np.ndarray
    u0: np.ndarray
    t: float = 0.0

    @classmethod
    def from_array(cls, a: np.ndarray, t: float = 0.0) -> "State3":
        a = np.asarray(a, dtype=float)
        return cls(*(a[i].copy() for i in range(3)), t=t)

    def as_array(self) -> np.ndarray:
        return np.stack([self.u1, self.u2, self.u0]).astype(float)

    @property
    def N(self) -> int:
        return len(self.u1)
