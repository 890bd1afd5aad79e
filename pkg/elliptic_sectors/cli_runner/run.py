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
import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional

# Third party libraries
import numpy as np

# Local folder libraries
from .. import __version__
from ..mesh_fem import FormDomainFlavor
from .config import Scenario
from .tasks import FLAVOR_INDEPENDENT, TASK_FUNCTIONS, TaskContext, TaskResult

LOGGER = logging.getLogger(__name__)

# Bump when the layout of report.json changes.
SCHEMA_VERSION = 1


class TaskError(RuntimeError):
    def __init__(self, task: str, flavor: Optional[FormDomainFlavor], cause: Exception) -> None:
        self.task = task
        self.flavor = flavor
        where = task if flavor is None else f"{task} ({flavor.value})"
        super().__init__(f"Task {where} failed: {cause}")


@dataclass
class RunReport:
    """
    Results of all tasks in run order. The verdict only considers asserted checks.
    Wall times are kept apart so that the report itself is reproducible.
    """

    scenario: Scenario
    results: list[TaskResult] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    def failed_checks(self) -> list[str]:
        return [
            f"{result.key}: {check.name}"
            for result in self.results
            for check in result.checks
            if check.asserted and not check.passed
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "scenario": self.scenario.to_dict(),
            "passed": self.passed,
            "results": [result.to_dict() for result in self.results],
        }


def run(scenario: Scenario) -> RunReport:
    """
    Run the scenario's tasks in declared order, once per form domain flavor unless the task does
    not use the scenario mesh.

    Arguments:
        scenario: A validated scenario.

    Return:
        The report. Errors inside a task are raised as :class:`TaskError`.
    """
    contexts = {
        flavor: TaskContext(scenario=scenario, flavor=flavor) for flavor in scenario.flavors
    }
    report = RunReport(scenario=scenario)

    for task in scenario.tasks:
        flavors: list[Optional[FormDomainFlavor]] = (
            [None] if task in FLAVOR_INDEPENDENT else list(scenario.flavors)
        )
        for flavor in flavors:
            result = TaskResult(task=task, flavor=flavor)
            context = contexts[scenario.flavors[0] if flavor is None else flavor]
            LOGGER.info("Running %s", result.key)

            start = time.perf_counter()
            try:
                TASK_FUNCTIONS[task](context, result)
            except (ValueError, RuntimeError) as exception:
                raise TaskError(task, flavor, exception) from exception
            report.timings[result.key] = time.perf_counter() - start

            LOGGER.info(
                "%s %s in %.2f s",
                result.key,
                "passed" if result.passed else "FAILED",
                report.timings[result.key],
            )
            report.results.append(result)

    return report


def _plain(value: Any) -> Any:
    """
    JSON compatible copy of a value. Non-finite floats become strings.
    """
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else str(number)
    if isinstance(value, (complex, np.complexfloating)):
        return [_plain(value.real), _plain(value.imag)]
    return value


def _csv_cell(value: Any) -> Any:
    plain = _plain(value)
    return repr(plain) if isinstance(plain, float) else plain


def write_report(report: RunReport, output_path: Path) -> list[Path]:
    """
    Write ``report.json``, ``timing.json`` and one CSV file per table.

    Tables of flavor dependent tasks carry the flavor in the file name.

    Return:
        The written files.
    """
    output_path.mkdir(parents=True, exist_ok=True)
    written = []

    report_file = output_path / "report.json"
    report_file.write_text(
        json.dumps(_plain(report.to_dict()), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append(report_file)

    timing_file = output_path / "timing.json"
    timing_file.write_text(
        json.dumps(_plain(report.timings), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append(timing_file)

    for result in report.results:
        for name, (header, rows) in result.tables.items():
            stem = name if result.flavor is None else f"{name}_{result.flavor.value}"
            csv_file = output_path / f"{stem}.csv"
            with csv_file.open("w", encoding="utf-8", newline="") as file_handle:
                writer = csv.writer(file_handle, lineterminator="\n")
                writer.writerow(header)
                writer.writerows([[_csv_cell(cell) for cell in row] for row in rows])
            written.append(csv_file)

    LOGGER.info("Wrote %d files to %s", len(written), output_path)
    return written


def verdict_from_json(report_file: Path) -> bool:
    """
    Recompute the overall verdict from a written report.
    """
    data = json.loads(report_file.read_text(encoding="utf-8"))
    return all(
        check["passed"]
        for result in data["results"]
        for check in result["checks"]
        if check["asserted"]
    )
