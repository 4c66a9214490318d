"""Command line entry point.

Subcommands::

    simulate          --config <path> [--out <dir>]
    converge          --config <path> [--eps 0.1,0.05,0.025] [--out <dir>]
    check-invariants  --config <path>
    cross-validate    --config <path>

Exit codes: 0 ok, 1 usage, 2 validation, 3 invariant failure, 4 runtime.
``HENLE_THREADS`` caps the number of concurrent runs in ``converge``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, _backend
from . import diagnostics as diag
from . import io
from .config import RunConfig, load_config, parse_eps_list
from .exceptions import ConfigError, DomainError, HenleError, InputError
from .grid import run

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_INVARIANT, EXIT_RUNTIME = 0, 1, 2, 3, 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="henle", description="Loop-of-Henle relaxation model runs and checks.")
    ap.add_argument("--version", action="version", version=f"henle {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run the configured model(s) and write CSV output")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (overrides out_dir)")

    c = sub.add_parser("converge", help="eps -> 0 study against the reduced model")
    c.add_argument("--config", required=True)
    c.add_argument("--eps", help="comma-separated, strictly decreasing eps values")
    c.add_argument("--out", help="output directory (overrides out_dir)")

    i = sub.add_parser("check-invariants", help="non-negativity, L-infinity and mass balance")
    i.add_argument("--config", required=True)

    x = sub.add_parser("cross-validate", help="grid solver against the fixed-point solver")
    x.add_argument("--config", required=True)
    return ap


def _manifest(cfg: RunConfig, out: Path, command: str) -> None:
    io.write_manifest(
        cfg.to_text(),
        out / "manifest.txt",
        extra=[("command", command), ("version", __version__), ("backend", _backend.BACKEND)],
    )


def _simulate(cfg: RunConfig, base: Path, out: Path) -> int:
    p, g = cfg.params, cfg.grid()
    d = cfg.data(base)
    models = ("full", "reduced") if cfg.model == "both" else (cfg.model,)
    for m in models:
        traj = run(p, d, g, model=m, stride=cfg.stride, reading=cfg.initial_reading)
        target = out / m if cfg.model == "both" else out
        io.write_fields(traj, target / "fields.csv")
        io.write_boundary(traj, target / "boundary.csv")
        io.write_invariants(diag.diagnose(traj, p), target / "invariants.csv")
    _manifest(cfg, out, "simulate")
    print(f"wrote {', '.join(models)} run(s) to {out}")
    return EXIT_OK


def _converge(cfg: RunConfig, base: Path, out: Path) -> int:
    report = diag.convergence_study(cfg.params, cfg.data(base), cfg.grid(), cfg.eps_list, cfg.initial_reading)
    io.write_convergence(report, out / "convergence.csv")
    io.write_orders(report, out / "orders.csv")
    _manifest(cfg, out, "converge")
    for q in diag.ConvergenceReport.QUANTITIES:
        v = report.fitted_order.get(q)
        print(f"{q}: fitted order {'n/a' if v is None else format(v, '.4f')}")
    if report.error is not None:
        print(f"error: study stopped early: {report.error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _check(cfg: RunConfig, base: Path) -> int:
    checks = diag.check_invariants(cfg.params, cfg.data(base), cfg.grid())
    ok = True
    for c in checks:
        ok &= c.passed
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: value={c.value:.6e} limit={c.limit:.6e}")
    return EXIT_OK if ok else EXIT_INVARIANT


def _cross(cfg: RunConfig, base: Path) -> int:
    g = cfg.grid()
    dist = diag.cross_validate(cfg.params, cfg.data(base), g, cfg.picard())
    print(f"distance={dist:.17g} dx={g.dx:.17g} ratio={dist / g.dx:.6f}")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr, end="")
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
        if getattr(args, "eps", None):
            try:
                cfg.eps_list = parse_eps_list(args.eps)
            except ValueError as exc:
                raise ConfigError(f"--eps: {exc}") from None
        if getattr(args, "out", None):
            cfg.out_dir = args.out
        base = Path(args.config).resolve().parent
        out = Path(cfg.out_dir)
        if args.command == "simulate":
            return _simulate(cfg, base, out)
        if args.command == "converge":
            return _converge(cfg, base, out)
        if args.command == "check-invariants":
            return _check(cfg, base)
        return _cross(cfg, base)
    except (ConfigError, InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (HenleError, OSError, RuntimeError, FloatingPointError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
