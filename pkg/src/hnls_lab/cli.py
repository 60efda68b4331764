"""Command line entry point ``hnls-lab``.

Exit codes: 0 every checked row passed, 1 some row failed, 2 bad usage or
configuration, 3 the computation aborted (blow-up, non-convergent series,
singular determinant, spectrum leaving the grid). Each command writes
``<name>.csv`` and ``<name>_manifest.json`` into ``--out`` (dashes in the
command become underscores).
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .errors import (
    BlowUpError,
    ConfigError,
    NonConvergentError,
    ResolutionError,
    SingularDeterminantError,
    SingularSymbolError,
)
from .experiments.config import load_config
from .experiments.results import all_passed, write_csv, write_manifest
from .experiments.runs import COMMANDS
from .experiments.suites import SUITES, run_suite

log = logging.getLogger("hnls_lab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ABORT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _common(p):
    p.add_argument("--config", type=Path, help="JSON experiment configuration")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--seed", type=int, help="random seed (overrides the config)")
    p.add_argument("--threads", type=int, help="worker threads for alpha-scan")
    p.add_argument("--tolerance-scale", type=float, dest="tolerance_scale", help="multiply every tolerance")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hnls-lab", description="Numerical checks for the Hirota equation and its perturbation determinant.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("suite", choices=SUITES)
    _common(v)
    for name in COMMANDS:
        _common(sub.add_parser(name, help=f"run the {name} experiment"))
    return parser


def _finish(args, command, config_dict, rows, t0, extra):
    args.out.mkdir(parents=True, exist_ok=True)
    stem = command.replace("-", "_")
    traj = extra.pop("trajectory", None)
    if traj is not None:
        np.savez(args.out / "trajectory.npz", **traj)
    write_csv(rows, args.out / f"{stem}.csv")
    write_manifest(args.out / f"{stem}_manifest.json", command, config_dict, rows, time.perf_counter() - t0, extra)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    overrides = {"seed": args.seed, "threads": args.threads, "tolerance_scale": args.tolerance_scale}
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        sys.stderr.write(f"hnls-lab: configuration error: {exc}\n")
        return EXIT_USAGE

    command = args.command
    if command == "verify":
        command = f"verify-{args.suite}"
        rows = run_suite(args.suite, seed=cfg.seed, tol_scale=cfg.tolerance_scale)
        _finish(args, command, cfg.to_dict(), rows, t0, {})
    else:
        try:
            rows, extra = COMMANDS[command](cfg)
        except ConfigError as exc:
            sys.stderr.write(f"hnls-lab: configuration error: {exc}\n")
            return EXIT_USAGE
        except (NonConvergentError, SingularSymbolError, SingularDeterminantError, BlowUpError, ResolutionError) as exc:
            sys.stderr.write(f"hnls-lab: aborted: {exc}\n")
            _finish(args, command, cfg.to_dict(), [], t0, {"aborted": str(exc)})
            return EXIT_ABORT
        _finish(args, command, cfg.to_dict(), rows, t0, extra)
        if extra.get("aborted"):
            sys.stderr.write(f"hnls-lab: aborted: {extra['aborted']}; partial output written\n")
            return EXIT_ABORT
    n_fail = sum(1 for r in rows if r.passed is False)
    sys.stdout.write(f"{command}: {len(rows)} rows, {n_fail} failed\n")
    return EXIT_OK if all_passed(rows) else EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
