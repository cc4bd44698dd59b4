"""
Command line interface: ``pickands estimate|validate|sweep|simulate``.
"""
import argparse
import logging
import sys

from typing import List, Optional

from . import __version__
from .api import (
    EXIT_OK,
    W_PATHS,
    XI_PATHS,
    anchor_configs,
    exit_code,
    run,
    simulate,
    sweep,
    validate_suite,
)
from .config import FORMATS, ExperimentConfig
from .exceptions import PickandsError
from .records import to_record, write_paths


LOGGER = logging.getLogger(__name__)

EXIT_CHECKS_FAILED = 1


def _add_common(parser: argparse.ArgumentParser, many: bool = False) -> None:
    if many:
        parser.add_argument(
            "--config",
            action="append",
            default=[],
            metavar="PATH",
            help="experiment config (repeatable)",
        )
    else:
        parser.add_argument(
            "--config", required=True, metavar="PATH", help="experiment config"
        )
    parser.add_argument("--seed", type=int, help="overrides the config seed")
    parser.add_argument("--workers", type=int, help="worker processes")
    parser.add_argument("--output", metavar="PATH", help="overrides the output file")
    parser.add_argument("--format", choices=FORMATS, help="output format")
    parser.add_argument(
        "--mirror",
        action="store_true",
        help="also write a JSON-lines copy of CSV output",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pickands",
        description="Monte Carlo estimation of generalized Pickands constants.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="more logging (-vv debug)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("estimate", help="run the configured estimator"))

    validate = sub.add_parser("validate", help="run the property battery")
    _add_common(validate, many=True)
    validate.add_argument(
        "--anchors", action="store_true", help="add the built-in anchor configs"
    )
    validate.add_argument("--n", type=int, help="replicates per check")

    sweep_parser = sub.add_parser("sweep", help="per-delta estimates and extrapolation")
    _add_common(sweep_parser)
    sweep_parser.add_argument(
        "--delta", type=float, nargs="+", help="overrides extras.delta_list"
    )

    simulate_parser = sub.add_parser("simulate", help="dump raw paths as CSV")
    _add_common(simulate_parser)
    simulate_parser.add_argument("--kind", choices=(W_PATHS, XI_PATHS), default=W_PATHS)
    simulate_parser.add_argument("--paths", type=int, default=10)

    return parser


def _load(path: str, args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.read(path)
    config.override(
        seed=args.seed, workers=args.workers, output=args.output, format=args.format
    )

    return config


def _print_results(results) -> None:
    for result in results:
        record = to_record(result)
        print(
            f"{record['method']:<16} {record['process']} delta={record['delta']:g}: "
            f"{record['value']:.6f} +- {record['stderr']:.6f} "
            f"[{record['ci_lo']:.6f}, {record['ci_hi']:.6f}]"
        )
        if record["truncation_note"]:
            print(f"  {record['truncation_note']}")


def _estimate(args: argparse.Namespace) -> int:
    config = _load(args.config, args)
    outcome = run(config, mirror=args.mirror)
    if outcome.status != EXIT_OK:
        print(f"error: {outcome.message}", file=sys.stderr)
        return outcome.status

    _print_results(outcome.results)

    return EXIT_OK


def _validate(args: argparse.Namespace) -> int:
    configs = [_load(path, args) for path in args.config]
    if args.anchors:
        configs.extend(anchor_configs())
        for config in configs[len(args.config) :]:
            config.override(seed=args.seed, workers=args.workers)
    if args.n is not None:
        for config in configs:
            config.document["n"] = args.n

    report = validate_suite(configs)
    for line in report.lines():
        print(line)

    return EXIT_OK if report.passed else EXIT_CHECKS_FAILED


def _sweep(args: argparse.Namespace) -> int:
    config = _load(args.config, args)
    _print_results(sweep(config, args.delta, mirror=args.mirror))

    return EXIT_OK


def _simulate(args: argparse.Namespace) -> int:
    config = _load(args.config, args)
    times, values = simulate(config, args.kind, args.paths)
    write_paths(config.output, times, values)
    print(f"wrote {values.shape[0]} {args.kind} paths to {config.output}")

    return EXIT_OK


COMMANDS = {
    "estimate": _estimate,
    "validate": _validate,
    "sweep": _sweep,
    "simulate": _simulate,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        return COMMANDS[args.command](args)
    except PickandsError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code(e)
