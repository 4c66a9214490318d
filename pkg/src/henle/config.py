"""Line-based ``key = value`` run configuration.

Blank lines and lines starting with ``#`` are ignored; a ``#`` after a value
starts a comment. Every key is optional. Unknown keys, repeated keys and
malformed values raise :class:`ConfigError` naming the offending line.

Example::

    # five-field run on smooth data
    eps   = 0.05
    N     = 200
    model = both
    preset = smooth
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .characteristics import PicardConfig
from .exceptions import ConfigError
from .grid import Grid1D
from .layers import READINGS, RegularizationParams, default_matching, regularize
from .model import Params, ProblemData
from . import presets

MODELS = ("full", "reduced", "both")
_PARAM_KEYS = ("alpha", "K1", "K2", "eps", "Vm", "kM", "L", "T")


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"non-finite number {s!r}")
    return v


def _int(s: str) -> int:
    return int(s)


def _bool(s: str) -> bool:
    t = s.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected on/off, got {s!r}")


def _opt_float(s: str):
    return None if s.strip().lower() in ("", "none", "auto") else _float(s)


def _opt_str(s: str):
    return None if s.strip().lower() in ("", "none") else s.strip()


def _choice(options):
    def conv(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {s!r}")
        return s

    return conv


def parse_eps_list(s: str) -> list[float]:
    """Comma-separated, strictly decreasing, positive eps values."""
    items = [t.strip() for t in s.split(",") if t.strip()]
    if not items:
        raise ValueError("eps_list is empty")
    vals = [_float(t) for t in items]
    if any(v <= 0 for v in vals):
        raise ValueError("eps values must be > 0")
    if any(b >= a for a, b in zip(vals, vals[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    return vals


@dataclass
class RunConfig:
    """Fully resolved run description (defaults filled in)."""

    params: Params = field(default_factory=Params)
    N: int = 200
    model: str = "full"
    preset: str = "smooth"
    seed: int = 0
    const_value: float = 1.0
    data_file: str | None = None
    ub_file: str | None = None
    eps_list: list = field(default_factory=lambda: [0.1, 0.05, 0.025, 0.0125])
    out_dir: str = "out"
    stride: int = 1
    regularize: bool = False
    delta: float = 0.05
    c1: float | None = None
    c2: float | None = None
    initial_reading: str = "average"
    picard_tol: float = 1e-10
    picard_max_iter: int = 100
    picard_window: float | None = None
    literal_q2_exchange: bool = False

    # --- derived objects -------------------------------------------------
    def grid(self) -> Grid1D:
        return Grid1D.from_params(self.params, self.N)

    def picard(self) -> PicardConfig:
        return PicardConfig(
            window=self.picard_window,
            tol=self.picard_tol,
            max_iter=self.picard_max_iter,
            literal_q2_exchange=self.literal_q2_exchange,
        )

    def raw_data(self, base: Path | None = None) -> ProblemData:
        p = self.params
        if self.data_file is not None:
            base = base or Path(".")
            ub = None if self.ub_file is None else base / self.ub_file
            return presets.from_files(base / self.data_file, ub)
        if self.preset == "constant":
            return presets.make("constant", p, value=self.const_value)
        if self.preset == "random-bv":
            return presets.make("random-bv", p, seed=self.seed)
        return presets.make(self.preset, p)

    def data(self, base: Path | None = None) -> ProblemData:
        """Problem data, regularised when ``regularize`` is on."""
        d = self.raw_data(base)
        if not self.regularize:
            return d
        c1, c2 = self.matching(d)
        return regularize(d, RegularizationParams(self.delta, c1, c2), self.params)

    def matching(self, d: ProblemData):
        c = None
        if self.c1 is None or self.c2 is None:
            c = default_matching(d, self.params)
        return (c if self.c1 is None else self.c1), (c if self.c2 is None else self.c2)

    # --- serialisation -----------------------------------------------------
    def items(self):
        """``(key, text)`` pairs of every setting, in a fixed order."""
        out = [(k, _fmt(getattr(self.params, k))) for k in _PARAM_KEYS]
        for f in fields(self):
            if f.name == "params":
                continue
            out.append((f.name, _fmt(getattr(self, f.name))))
        return out

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.items())


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, list):
        return ",".join(_fmt(float(e)) for e in v)
    return str(v)


_CONVERTERS = {
    **{k: _float for k in _PARAM_KEYS},
    "N": _int,
    "model": _choice(MODELS),
    "preset": _choice(tuple(presets.PRESETS)),
    "seed": _int,
    "const_value": _float,
    "data_file": _opt_str,
    "ub_file": _opt_str,
    "eps_list": parse_eps_list,
    "out_dir": str,
    "stride": _int,
    "regularize": _bool,
    "delta": _float,
    "c1": _opt_float,
    "c2": _opt_float,
    "initial_reading": _choice(READINGS),
    "picard_tol": _float,
    "picard_max_iter": _int,
    "picard_window": _opt_float,
    "literal_q2_exchange": _bool,
}

KEYS = tuple(_CONVERTERS)


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text."""
    values, where = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, val = (s.strip() for s in line.partition("="))
        if key not in _CONVERTERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: key {key!r} repeated (first on line {where[key]})")
        try:
            values[key] = _CONVERTERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        where[key] = lineno

    def fail(key, msg):
        loc = f"line {where[key]}: " if key in where else ""
        raise ConfigError(f"{loc}{msg}")

    pkw = {k: values.pop(k) for k in _PARAM_KEYS if k in values}
    try:
        params = Params(**pkw)
    except ConfigError as exc:
        words = str(exc).split()
        bad = next((k for k in pkw if k in words[:2]), None)
        fail(bad, str(exc))
    cfg = RunConfig(params=params, **values)

    if cfg.N < 2:
        fail("N", "N must be >= 2")
    if cfg.stride < 1:
        fail("stride", "stride must be >= 1")
    if cfg.picard_max_iter < 1:
        fail("picard_max_iter", "picard_max_iter must be >= 1")
    if not cfg.picard_tol > 0:
        fail("picard_tol", "picard_tol must be > 0")
    if cfg.picard_window is not None and not cfg.picard_window > 0:
        fail("picard_window", "picard_window must be > 0")
    if cfg.ub_file is not None and cfg.data_file is None:
        fail("ub_file", "ub_file needs data_file")
    for k in ("c1", "c2"):
        v = getattr(cfg, k)
        if v is not None and v < 0:
            fail(k, f"{k} must be >= 0")
    if cfg.regularize:
        if not cfg.delta > 0:
            fail("delta", "delta must be > 0")
        lim = min(params.L, params.T) / 4
        if not cfg.delta < lim:
            fail("delta", f"delta={cfg.delta} must be < min(L, T)/4 = {lim}")
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
