"""Exception hierarchy shared by the solvers and the command line."""


class HenleError(Exception):
    """Base class for all package errors."""


class ConfigError(HenleError, ValueError):
    """Invalid parameters, grid or configuration text."""


class DomainError(HenleError, ValueError):
    """Non-finite input handed to a pointwise model function."""


class InputError(HenleError, ValueError):
    """Inputs that do not cover what an operation needs (missing traces, bad sampling)."""


class NonContractionError(HenleError, RuntimeError):
    """The fixed-point iteration did not reach its tolerance within the iteration cap."""


class SolverDivergence(HenleError, RuntimeError):
    """A run produced non-finite values."""
