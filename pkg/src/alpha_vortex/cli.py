"""Command line entry point: ``alpha-vortex {tabulate|verify|run|confinement}``.

Exit codes: 0 success, 1 failed check, 2 usage or config error, 3 numerical
blow-up (partial outputs are still written).
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import PRESETS, load_config
from .dynamics import set_threads
from .kernels import Blob, tabulate
from .runner import (confinement_rows, contained_fraction, execute, prepare_output_dir,
                     write_confinement_csv, write_run_outputs)
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BLOWUP = 0, 1, 2, 3
THREADS_ENV = "ALPHA_VORTEX_THREADS"


class UsageError(Exception):
    pass


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=argparse.SUPPRESS,
                        help=f"worker threads (default: ${THREADS_ENV} or all cores); 1 forces deterministic mode")

    p = argparse.ArgumentParser(prog="alpha-vortex", description="Euler-alpha vortex blob simulator and diagnostics.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=_positive_int, default=None, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tabulate", parents=[common], help="write gamma(r) for a blob as CSV")
    t.add_argument("--family", required=True, help="euler-alpha, gaussian or krasny")
    t.add_argument("--scale", type=float, required=True, help="alpha or epsilon")
    t.add_argument("--rmin", type=float, default=0.0)
    t.add_argument("--rmax", type=float, required=True)
    t.add_argument("--steps", type=int, required=True, help="number of intervals (rows = steps + 1)")
    t.add_argument("--out", "-o", default="-", help="output file, '-' for stdout")

    v = sub.add_parser("verify", parents=[common], help="run a self-check suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tamper", action="store_true", help=argparse.SUPPRESS)

    for name, text in (("run", "simulate a config and write CSV outputs"),
                       ("confinement", "test support confinement against the growth envelope")):
        r = sub.add_parser(name, parents=[common], help=text)
        r.add_argument("config", help=f"JSON config, run manifest, or preset ({', '.join(PRESETS)})")
        r.add_argument("--output-dir", default=None, help="override the config's output_dir")
    return p


def resolve_threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get(THREADS_ENV)
    if env is None or env.strip() == "":
        return None
    try:
        n = int(env)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
    return n


def cmd_tabulate(args) -> int:
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if not (0 <= args.rmin < args.rmax):
        raise UsageError("need 0 <= --rmin < --rmax")
    blob = Blob(args.family, args.scale)
    table = tabulate(blob, np.linspace(args.rmin, args.rmax, args.steps + 1))
    if args.out == "-":
        sys.stdout.write(table.to_csv())
    else:
        try:
            table.to_csv(args.out)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out!r}: {exc.strerror or exc}") from exc
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_suite(args.suite, seed=args.seed, tamper=args.tamper)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{args.suite}: {len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def _deterministic(threads):
    return True if threads == 1 else None


def cmd_run(args, threads) -> int:
    cfg = load_config(args.config, output_dir=args.output_dir)
    out = prepare_output_dir(cfg.output_dir)
    result = execute(cfg, deterministic=_deterministic(threads))
    write_run_outputs(result, out, threads=threads)
    print(f"wrote {len(result.records)} diagnostics rows for {result.initial.size} particles to {out}")
    if result.blowup is not None:
        print(f"blow-up: {result.blowup}", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_confinement(args, threads) -> int:
    cfg = load_config(args.config, output_dir=args.output_dir)
    if not cfg.spec.nonnegative:
        raise UsageError("confinement needs a nonnegative vorticity spec")
    out = prepare_output_dir(cfg.output_dir)
    result = execute(cfg, deterministic=_deterministic(threads), recenter_initial=True)
    rows = confinement_rows(result.records)
    frac = contained_fraction(rows)
    write_confinement_csv(out / "confinement.csv", rows)
    write_run_outputs(result, out, threads=threads, command="confinement",
                      extra={"contained_fraction": frac})
    print(f"contained_fraction={frac!r}")
    if not result.theoretical_guarantee:
        print("note: no confinement guarantee applies to this blob (theoretical_guarantee=false)")
    if result.blowup is not None:
        print(f"blow-up: {result.blowup}", file=sys.stderr)
        return EXIT_BLOWUP
    if result.theoretical_guarantee and frac < 1.0:
        return EXIT_FAIL
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        threads = resolve_threads(getattr(args, "threads", None))
        set_threads(threads)
        if args.command == "tabulate":
            return cmd_tabulate(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "run":
            return cmd_run(args, threads)
        return cmd_confinement(args, threads)
    except (UsageError, ValueError) as exc:
        print(f"alpha-vortex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
