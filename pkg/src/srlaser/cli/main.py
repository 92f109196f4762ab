"""``srlaser`` command line.

Subcommands::

    srlaser sweep    --config FILE [--out DIR] [--jobs N] [--task NAME ...]
    srlaser exact    --config FILE [--out DIR] [--jobs N]
    srlaser figures  --out DIR
    srlaser validate

Exit status: 0 on full success, 2 when some grid points (or validation
checks) failed, 1 on configuration or input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..errors import ConfigError, MissingPayload
from .config import TASKS, load_config

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="srlaser", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, helptext in (("sweep", "run a parameter sweep"),
                           ("exact", "exact N-spin steady states over the configured grid")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out")
        sp.add_argument("--jobs", type=int)
        if name == "sweep":
            sp.add_argument("--task", action="append", choices=TASKS,
                            help="restrict to this task (repeatable); default from config")

    fp = sub.add_parser("figures", help="emit SVG figures for a result set")
    fp.add_argument("--out", required=True)

    sub.add_parser("validate", help="run the quick oracle and invariant checks")
    return ap


def _sweep(args, force_tasks=None) -> int:
    from .sweep import run_sweep

    spec = load_config(args.config)
    tasks = force_tasks or getattr(args, "task", None)
    if tasks:
        spec.tasks = list(dict.fromkeys(tasks))
    if args.jobs is not None and args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    records = run_sweep(spec, out=args.out, jobs=args.jobs)
    failed = [r for r in records if not r.ok]
    for r in failed:
        print(f"point {r.task}#{r.index} failed: {r.error}: {r.message}", file=sys.stderr)
    print(f"{len(records)} records, {len(failed)} failed, written to {args.out or spec.out}")
    return EXIT_PARTIAL if failed else EXIT_OK


def _figures(args) -> int:
    from .figures import emit_figures

    written = emit_figures(args.out)
    print(f"{len(written)} figures written to {args.out}")
    return EXIT_OK


def _validate(args) -> int:
    from ..validation import run_checks

    results = run_checks()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_PARTIAL


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "sweep":
            return _sweep(args)
        if args.command == "exact":
            return _sweep(args, force_tasks=["exact-steady-state"])
        if args.command == "figures":
            return _figures(args)
        return _validate(args)
    except (ConfigError, MissingPayload, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
