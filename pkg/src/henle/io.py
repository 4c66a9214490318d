"""Deterministic CSV output.

Numbers are written with 17 significant digits (``format(v, '.17g')``), so
reading a file back reproduces every double exactly. ``None`` becomes an
empty field. Lines end with ``'\\n'`` on every platform.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .diagnostics import ConvergenceReport, DiagnosticSeries
from .exceptions import InputError
from .grid import Trajectory

FIELDS_HEADER = ("t", "x", "u1", "u2", "q1", "q2", "u0")
BOUNDARY_HEADER = ("t", "u1_at_L", "u2_at_0")
INVARIANTS_HEADER = ("t", "H", "balance_residual", "min_val", "max_val", "tv_total")
CONVERGENCE_HEADER = ("eps", "gap_q1u1", "gap_q2u2", "dist_u1", "dist_u2", "dist_u0")


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (str,)):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def write_rows(path, header, rows) -> None:
    """Write ``header`` then ``rows``; cells pass through :func:`fmt`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(fmt(c) for c in r) + "\n")


def _field_rows(traj: Trajectory):
    x = traj.grid.x
    full = traj.model == "full"
    for k, t in enumerate(traj.t):
        a = traj.data[k]
        if full:
            cols = (a[0], a[1], a[2], a[3], a[4])
        else:
            cols = (a[0], a[1], None, None, a[2])
        for i in range(len(x)):
            yield (t, x[i]) + tuple(None if c is None else c[i] for c in cols)


def write_fields(traj: Trajectory, path) -> None:
    write_rows(path, FIELDS_HEADER, _field_rows(traj))


def write_boundary(traj: Trajectory, path) -> None:
    write_rows(path, BOUNDARY_HEADER, zip(traj.trace_t, traj.u1_at_L, traj.u2_at_0))


def write_invariants(series: DiagnosticSeries, path) -> None:
    """One row per snapshot; ``balance_residual`` is the defect over the interval
    ending at the next snapshot, so the last row leaves it empty."""
    res = list(series.balance_residual) + [None]
    tv = series.tv_total
    rows = zip(series.t, series.H, res, series.min_val, series.max_val, tv)
    write_rows(path, INVARIANTS_HEADER, rows)


def write_convergence(report: ConvergenceReport, path) -> None:
    write_rows(path, CONVERGENCE_HEADER, report.rows())


def write_orders(report: ConvergenceReport, path) -> None:
    rows = [(q, report.fitted_order.get(q)) for q in ConvergenceReport.QUANTITIES]
    write_rows(path, ("quantity", "fitted_order"), rows)


def write_csv(obj, path) -> None:
    """Dispatch on the object type: a trajectory gives ``fields.csv`` content,
    a convergence report ``convergence.csv`` and a diagnostic series
    ``invariants.csv``."""
    if isinstance(obj, Trajectory):
        write_fields(obj, path)
    elif isinstance(obj, ConvergenceReport):
        write_convergence(obj, path)
    elif isinstance(obj, DiagnosticSeries):
        write_invariants(obj, path)
    else:
        raise InputError(f"no CSV schema for {type(obj).__name__}")


def write_manifest(text: str, path, extra=None) -> None:
    """Resolved configuration in ``key = value`` form, plus ``extra`` pairs as comments."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [text]
    for k, v in extra or ():
        lines.append(f"# {k}: {v}\n")
    with open(path, "w", newline="") as fh:
        fh.write("".join(lines))


def read_csv(path):
    """Header and columns of a CSV written by this module.

    Returns ``(header, {name: array})``. Numeric columns become float
    arrays with NaN for empty cells; other columns stay as strings.
    """
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header is None:
            raise InputError(f"{path}: empty file")
        rows = list(rd)
    cols = {}
    for j, name in enumerate(header):
        cells = [r[j] for r in rows]
        try:
            cols[name] = np.array([float(c) if c != "" else math.nan for c in cells], dtype=float)
        except ValueError:
            cols[name] = np.array(cells, dtype=str)
    return tuple(header), cols


def read_fields(path, N: int | None = None):
    """``(t, x, data)`` from a ``fields.csv``; ``data`` has shape ``(n_t, 5, N)``
    with NaN rows for the columns a reduced run leaves empty."""
    header, cols = read_csv(path)
    if header != FIELDS_HEADER:
        raise InputError(f"{path}: unexpected header {header}")
    t = cols["t"]
    if N is None:
        N = int(np.sum(t == t[0])) if len(t) else 0
    if N == 0:
        return np.empty(0), np.empty(0), np.empty((0, 5, 0))
    nt = len(t) // N
    data = np.stack([cols[c].reshape(nt, N) for c in FIELDS_HEADER[2:]], axis=1)
    return t.reshape(nt, N)[:, 0], cols["x"][:N], data
