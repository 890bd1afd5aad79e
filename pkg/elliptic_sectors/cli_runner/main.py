# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

# Future libraries
from __future__ import annotations

# Standard libraries
import argparse
import logging
from pathlib import Path
from typing import Optional, Sequence

# Local folder libraries
from ..about import get_short_slogan
from ..mesh_fem import MESH_PRESETS, preset_labels
from ..regular_geometry import POLYLINE_PRESETS
from .config import COEFFICIENT_KINDS, TASKS, ConfigError, Scenario, load_config
from .plots import emit_plots
from .run import TaskError, run, write_report

LOGGER = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_CONFIG_ERROR = 2


def _task_list(value: str) -> list[str]:
    tasks = [item.strip() for item in value.split(",") if item.strip()]
    for task in tasks:
        if task not in TASKS:
            raise argparse.ArgumentTypeError(f"unknown task '{task}', available: {list(TASKS)}")
    return tasks


def arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="elliptic-sectors", description=get_short_slogan())
    parser.add_argument("--verbose", action="store_true", help="print debug messages")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="run a scenario and write its report")
    run_parser.add_argument("--config", type=Path, required=True, help="scenario file")
    run_parser.add_argument(
        "--out",
        type=Path,
        default=None,
        help="output directory, by default generated/<scenario name>",
    )
    run_parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_parser.add_argument(
        "--tasks", type=_task_list, default=None, help="comma separated tasks to run instead"
    )

    validate_parser = subparsers.add_parser("validate", help="check a scenario file")
    validate_parser.add_argument("--config", type=Path, required=True, help="scenario file")

    subparsers.add_parser("list-presets", help="list domains, coefficients, tasks and curves")

    return parser.parse_args(argv)


def _load(args: argparse.Namespace) -> Scenario:
    scenario = load_config(args.config)
    if getattr(args, "seed", None) is not None or getattr(args, "tasks", None) is not None:
        scenario = scenario.with_overrides(seed=args.seed, tasks=args.tasks)
    return scenario


def list_presets() -> None:
    print("Domains:")
    for name in MESH_PRESETS:
        print(f"  {name}: boundary labels {', '.join(preset_labels(name))}")
    print("Coefficients:")
    for kind, count in COEFFICIENT_KINDS.items():
        print(f"  {kind}: {count} number(s)")
    print(f"Tasks: {', '.join(TASKS)}")
    print(f"Curves: {', '.join(POLYLINE_PRESETS)}, koch<level>")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Return:
        0 if every asserted check passed, 1 on a failed check or task error, 2 on a bad
        scenario file.
    """
    args = arguments(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "list-presets":
        list_presets()
        return EXIT_PASSED

    try:
        scenario = _load(args)
    except ConfigError as exception:
        LOGGER.error("%s: %s", args.config, exception)
        return EXIT_CONFIG_ERROR

    if args.command == "validate":
        print(f"{args.config}: valid scenario '{scenario.name}' with tasks {list(scenario.tasks)}")
        return EXIT_PASSED

    output_path = Path("generated") / scenario.name if args.out is None else args.out
    try:
        report = run(scenario)
    except TaskError as exception:
        LOGGER.error(str(exception))
        return EXIT_FAILED

    write_report(report, output_path)
    if scenario.plots:
        emit_plots(report, output_path)

    if not report.passed:
        LOGGER.error("Failed checks:\n  %s", "\n  ".join(report.failed_checks()))
        return EXIT_FAILED

    print(f"Scenario '{scenario.name}' passed, report in {output_path}")
    return EXIT_PASSED
