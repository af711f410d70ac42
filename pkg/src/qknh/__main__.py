"""
Runs one experiment from a configuration file and command-line overrides.
"""

# =============================================================================

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from qknh.__version__ import __version__
from qknh.config import MODES, RunConfig, parse_override
from qknh.errors import QknhError
from qknh.runner import run, validate, write_json

# =============================================================================

EXIT_ERROR = 2
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

_MODE_HELP = {
    "spectrum": "branch and modified levels over the lambda window",
    "lattice": "crossing nodes and the local lattice parameters",
    "separatrix": "the quantum separatrix E_s(lambda) and V_b(lambda)",
    "evolve": "incoherent network evolution and the prediction report",
    "sweep": "random-phase realizations and their statistics",
    "oracle": "exact spectrum sheet and minimal gaps",
    "validate": "check the configuration without running",
}

# =============================================================================


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qknh",
        description=__doc__.strip(),
        epilog=(
            "Flags override the config file, which overrides the defaults. "
            "QKNH_THREADS caps the worker threads."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    modes = parser.add_subparsers(dest="mode", metavar="MODE", required=True)
    for mode in MODES:
        sub = modes.add_parser(mode, help=_MODE_HELP[mode])
        sub.add_argument("--config", type=Path, help="JSON config file")
        sub.add_argument("--seed", type=int, help="64-bit phase seed")
        sub.add_argument("--out", help="output directory")
        sub.add_argument(
            "--realizations", type=int, metavar="N", help="number R"
        )
        sub.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            dest="overrides",
            help="override a setting by dotted key (repeatable)",
        )
        sub.add_argument(
            "-v",
            "--verbose",
            action="count",
            default=0,
            help="-v for progress, -vv for debugging",
        )
    return parser


def _configure_logging(verbosity: int):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.config is not None:
        config = RunConfig.from_json(args.config)
    overrides = dict(parse_override(text) for text in args.overrides)
    overrides["experiment.mode"] = args.mode
    if args.seed is not None:
        overrides["experiment.seed"] = args.seed
    if args.out is not None:
        overrides["output.directory"] = args.out
    if args.realizations is not None:
        overrides["experiment.R"] = args.realizations
    return config.with_overrides(overrides)


def _report_error(exc: QknhError, out_dir: Optional[Path]):
    report = {
        "error": type(exc).__name__,
        "module": exc.module,
        "message": str(exc),
    }
    print(json.dumps(report, sort_keys=True))
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            write_json(out_dir / "error.json", report)
        except OSError:
            pass


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    _configure_logging(args.verbose)

    out_dir = Path(args.out) if args.out is not None else None
    try:
        config = _resolve_config(args)
        out_dir = config.output.path
        if args.mode == "validate":
            report = validate(config)
            print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
            if not report.ok:
                return EXIT_ERROR
        result = run(config)
    except QknhError as exc:
        _report_error(exc, out_dir)
        return EXIT_ERROR
    for path in result.outputs:
        print(path)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
