"""Command line: ``opensis run <config> --out DIR`` and ``opensis bounds <config>``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .analysis import bound_report
from .config import ConfigError, load_config
from .experiment import EXIT_ERROR, run_experiment


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opensis", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate ensembles and write CSV/SVG outputs")
    run.add_argument("config")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--kinds", help="comma list of open, replacement, pure")
    run.add_argument("--seed", type=int, help="override base_seed")
    run.add_argument("--realizations", type=int, help="override realizations")
    run.add_argument("--plots", action="store_true", help="also write SVG figures")
    run.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    run.add_argument("-v", "--verbose", action="store_true")

    bounds = sub.add_parser("bounds", help="print the closed-form bound report")
    bounds.add_argument("config")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "bounds":
            sys.stdout.write(bound_report(cfg).to_text())
            return 0
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        changes = {}
        if args.kinds:
            changes["kinds"] = tuple(k.strip() for k in args.kinds.split(",") if k.strip())
        if args.seed is not None:
            changes["base_seed"] = args.seed
        if args.realizations is not None:
            changes["realizations"] = args.realizations
        if changes:
            cfg = cfg.replace(**changes)
        return run_experiment(cfg, args.out, plots=args.plots, workers=args.workers)
    except (ConfigError, OSError, ValueError, RuntimeError) as exc:
        print(f"opensis: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
