"""Sodium transport in the loop of Henle: a five-field relaxation system with
lumen, epithelium and interstitium, and its three-field reduced limit.

Main entry points: :func:`henle.grid.run` (characteristic grid solver),
:func:`henle.characteristics.picard_solve` (fixed-point solver),
:mod:`henle.diagnostics` (estimates and studies) and :mod:`henle.cli`.
"""
from ._backend import BACKEND
from .characteristics import PicardConfig, picard_solve
from .config import RunConfig, parse_config
from .exceptions import (
    ConfigError,
    DomainError,
    HenleError,
    InputError,
    NonContractionError,
    SolverDivergence,
)
from .grid import Grid1D, Trajectory, run
from .model import Params, ProblemData, State3, State5, eval_G, eval_G_prime

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "DomainError",
    "Grid1D",
    "HenleError",
    "InputError",
    "NonContractionError",
    "Params",
    "PicardConfig",
    "ProblemData",
    "RunConfig",
    "SolverDivergence",
    "State3",
    "State5",
    "Trajectory",
    "eval_G",
    "eval_G_prime",
    "parse_config",
    "picard_solve",
    "run",
]
