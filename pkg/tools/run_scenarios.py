# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

# Standard libraries
import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

# Do PYTHONPATH insert() instead of append() to prefer any local repo checkout over any pip install
REPO_ROOT = Path(__file__).parent.parent.resolve()
sys.path.insert(0, str(REPO_ROOT))

# First party libraries
from elliptic_sectors.cli_runner.config import ConfigError, Scenario, load_config
from elliptic_sectors.cli_runner.plots import emit_plots
from elliptic_sectors.cli_runner.run import TaskError, run, write_report
from tools import tools_env


def arguments() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Run the shipped scenarios")
    parser.add_argument(
        "--output-path",
        type=Path,
        default=tools_env.ELLIPTIC_SECTORS_GENERATED / "scenarios",
        help="one report folder per scenario is created here",
    )
    parser.add_argument(
        "--num-threads", type=int, default=4, help="number of scenarios to run in parallel"
    )
    parser.add_argument(
        "scenarios",
        nargs="*",
        help="scenario names, without the .cfg suffix. All shipped scenarios if none are given",
    )
    return parser.parse_args()


def run_scenario(scenario: Scenario, output_path: Path) -> str:
    """
    Return:
        An error message, empty if the scenario passed.
    """
    try:
        report = run(scenario)
    except TaskError as exception:
        return str(exception)

    write_report(report, output_path)
    if scenario.plots:
        emit_plots(report, output_path)

    failed = report.failed_checks()
    return "" if not failed else f"failed checks {failed}"


def main() -> None:
    args = arguments()
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    scenario_files = sorted(tools_env.ELLIPTIC_SECTORS_SCENARIOS.glob("*.cfg"))
    if args.scenarios:
        available = {path.stem: path for path in scenario_files}
        unknown = sorted(set(args.scenarios) - set(available))
        if unknown:
            sys.exit(f"Unknown scenarios {unknown}. Available: {sorted(available)}")
        scenario_files = [available[name] for name in args.scenarios]

    # Parse everything before running anything.
    scenarios = []
    for scenario_file in scenario_files:
        try:
            scenarios.append(load_config(scenario_file))
        except ConfigError as exception:
            sys.exit(f"{scenario_file}: {exception}")

    def run_one(scenario: Scenario) -> str:
        return run_scenario(scenario, args.output_path / scenario.name)

    with ThreadPoolExecutor(max_workers=max(1, args.num_threads)) as executor:
        messages = list(executor.map(run_one, scenarios))

    failures = []
    for scenario, message in zip(scenarios, messages):
        print(f"{'FAIL' if message else 'pass'} {scenario.name}")
        if message:
            failures.append(f"{scenario.name}: {message}")

    if failures:
        sys.exit("Scenario failures:\n" + "\n".join(failures))

    print(f"All {len(scenarios)} scenarios passed. Reports in {args.output_path}")


if __name__ == "__main__":
    main()
