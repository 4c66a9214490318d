"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
kernels. ``HENLE_BACKEND=python`` forces the fallback, ``HENLE_BACKEND=compiled``
makes a missing extension an import error.
"""
import os

from . import _pykernels

_choice = os.environ.get("HENLE_BACKEND", "auto").strip().lower()

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
    if _choice == "compiled":
        raise

if _ckernels is not None and _choice != "python":
    kernels = _ckernels
    BACKEND = "compiled"
else:
    kernels = _pykernels
    BACKEND = "python"


def get(name: str | None = None):
    """Return the kernel module for ``name`` ('python' or 'compiled'), default active."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    return ["python"] + (["compiled"] if _ckernels is not None else [])
