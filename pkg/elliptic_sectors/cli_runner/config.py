# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

"""
Scenario files.

One ``key = value`` pair per line, text after "#" is ignored, lists are comma separated.
Every key may appear at most once and unknown keys are rejected.
``domain`` and ``tasks`` are required, see ``DEFAULTS`` for the rest.
"""

# Future libraries
from __future__ import annotations

# Standard libraries
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

# Third party libraries
import numpy as np
import numpy.typing as npt

# Local folder libraries
from ..mesh_fem import BoundaryPartition, FormDomainFlavor, preset_labels
from ..sector_math import (
    CoefficientField,
    CoefficientMatrix,
    rotation_coefficient,
    varying_coefficient,
)

TASKS = (
    "numrange",
    "resolvent",
    "semigroup",
    "ultra",
    "hardy",
    "geometry",
    "robin",
    "dynamic",
    "containment",
)
# Tasks that evaluate the pairing, which is defined for p >= 2 only.
PAIRING_TASKS = frozenset(["numrange", "robin", "dynamic", "containment"])
REQUIRED_KEYS = ("domain", "tasks")
COEFFICIENT_KINDS = {"identity": 0, "rotation": 1, "varying": 1, "matrix": 4}


class ConfigError(ValueError):
    def __init__(self, message: str, line_number: Optional[int] = None) -> None:
        self.line_number = line_number
        prefix = "" if line_number is None else f"Line {line_number}: "
        super().__init__(f"{prefix}{message}")


@dataclass(frozen=True)
class CoefficientSpec:
    kind: str = "identity"
    parameters: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in COEFFICIENT_KINDS:
            raise ValueError(
                f"Unknown coefficient '{self.kind}', available: {list(COEFFICIENT_KINDS)}"
            )
        if len(self.parameters) != COEFFICIENT_KINDS[self.kind]:
            raise ValueError(
                f"Coefficient '{self.kind}' takes {COEFFICIENT_KINDS[self.kind]} numbers, "
                f"got {len(self.parameters)}"
            )
        if self.kind == "matrix":
            # Raises for matrices that are not elliptic.
            CoefficientMatrix(np.array(self.parameters).reshape(2, 2))

    def field(self, sample_points: npt.ArrayLike) -> CoefficientField:
        if self.kind == "identity":
            return CoefficientField.constant(np.eye(2), name="identity")
        if self.kind == "rotation":
            return rotation_coefficient(self.parameters[0])
        if self.kind == "varying":
            return varying_coefficient(self.parameters[0], sample_points)
        return CoefficientField.constant(
            np.array(self.parameters).reshape(2, 2), name=self.describe()
        )

    def describe(self) -> str:
        return " ".join([self.kind] + [f"{value:g}" for value in self.parameters])


@dataclass(frozen=True)
class Scenario:
    name: str
    domain: str
    tasks: tuple[str, ...]
    resolution: int = 16
    flavors: tuple[FormDomainFlavor, ...] = (FormDomainFlavor.SUPPORT_AWAY,)
    dirichlet: frozenset[str] = frozenset()
    robin: Mapping[str, float] = field(default_factory=dict)
    dynamic: frozenset[str] = frozenset()
    coefficient: CoefficientSpec = CoefficientSpec()
    p_values: tuple[float, ...] = (2.0,)
    seed: int = 0
    samples: int = 200
    workers: int = 1
    sector_tolerance: float = 1e-9
    resolvent_radii: tuple[float, float, int] = (1e-2, 1e2, 8)
    ultra_t_min: Optional[float] = None
    ultra_t_max: float = 0.1
    ultra_expected_slope: Optional[float] = None
    ultra_slope_tolerance: float = 0.15
    plots: bool = False
    # Line of each key in the file, for error messages.
    lines: Mapping[str, int] = field(default_factory=dict, compare=False, repr=False)

    def partition(self) -> BoundaryPartition:
        return BoundaryPartition(dirichlet=self.dirichlet, robin=self.robin, dynamic=self.dynamic)

    def with_overrides(
        self, seed: Optional[int] = None, tasks: Optional[Sequence[str]] = None
    ) -> Scenario:
        """
        Copy with command line overrides applied and validated.
        """
        changes: dict[str, Any] = {}
        if seed is not None:
            if seed < 0:
                raise ConfigError(f"Seed must be nonnegative, got {seed}")
            changes["seed"] = seed
        if tasks is not None:
            changes["tasks"] = tuple(tasks)
            for task in tasks:
                if task not in TASKS:
                    raise ConfigError(f"Unknown task '{task}', available: {list(TASKS)}")
        scenario = dataclasses.replace(self, **changes)
        validate(scenario)
        return scenario

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "domain": self.domain,
            "resolution": self.resolution,
            "flavors": [flavor.value for flavor in self.flavors],
            "dirichlet": sorted(self.dirichlet),
            "robin": dict(sorted(self.robin.items())),
            "dynamic": sorted(self.dynamic),
            "coefficient": self.coefficient.describe(),
            "p": list(self.p_values),
            "tasks": list(self.tasks),
            "seed": self.seed,
            "samples": self.samples,
            "sector_tolerance": self.sector_tolerance,
            "resolvent_radii": list(self.resolvent_radii),
            "ultra_t_min": self.ultra_t_min,
            "ultra_t_max": self.ultra_t_max,
            "ultra_expected_slope": self.ultra_expected_slope,
            "ultra_slope_tolerance": self.ultra_slope_tolerance,
            "plots": self.plots,
        }


def _split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _nonnegative_integer(value: str) -> int:
    result = int(value)
    if result < 0:
        raise ValueError(f"expected a nonnegative integer, got {result}")
    return result


def _positive_integer(value: str) -> int:
    result = int(value)
    if result < 1:
        raise ValueError(f"expected a positive integer, got {result}")
    return result


def _number(value: str) -> float:
    result = float(value)
    if not math.isfinite(result):
        raise ValueError(f"expected a finite number, got {value}")
    return result


def _positive_number(value: str) -> float:
    result = _number(value)
    if not result > 0:
        raise ValueError(f"expected a positive number, got {value}")
    return result


def _boolean(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true or false, got '{value}'")


def _labels(value: str) -> frozenset[str]:
    return frozenset(_split_list(value))


def _flavors(value: str) -> tuple[FormDomainFlavor, ...]:
    if value == "both":
        return (FormDomainFlavor.SUPPORT_AWAY, FormDomainFlavor.SMOOTH_CLOSURE)
    try:
        return tuple(FormDomainFlavor(item) for item in _split_list(value))
    except ValueError as exception:
        raise ValueError(
            f"flavor must be 'both' or a list of {[flavor.value for flavor in FormDomainFlavor]}"
        ) from exception


def _robin(value: str) -> dict[str, float]:
    result = {}
    for item in _split_list(value):
        label, separator, number = item.partition(":")
        if not separator:
            raise ValueError(f"expected 'label:b', got '{item}'")
        coefficient = _number(number)
        if coefficient < 0:
            raise ValueError(f"Robin coefficient must be nonnegative, got {coefficient}")
        result[label.strip()] = coefficient
    return result


def _coefficient(value: str) -> CoefficientSpec:
    kind, *numbers = value.split()
    return CoefficientSpec(kind=kind, parameters=tuple(_number(number) for number in numbers))


def _p_values(value: str) -> tuple[float, ...]:
    result = tuple(_number(item) for item in _split_list(value))
    if not result:
        raise ValueError("expected at least one exponent")
    for p in result:
        if not p > 1:
            raise ValueError(f"exponent p must be greater than 1, got {p:g}")
    return result


def _tasks(value: str) -> tuple[str, ...]:
    result = tuple(_split_list(value))
    for task in result:
        if task not in TASKS:
            raise ValueError(f"unknown task '{task}', available: {list(TASKS)}")
    return result


def _radii(value: str) -> tuple[float, float, int]:
    fields = _split_list(value)
    if len(fields) != 3:
        raise ValueError("expected 'smallest, largest, count'")
    smallest, largest = _positive_number(fields[0]), _positive_number(fields[1])
    count = _positive_integer(fields[2])
    if largest < smallest:
        raise ValueError("largest radius is smaller than the smallest")
    return smallest, largest, count


PARSERS: dict[str, tuple[str, Callable[[str], Any]]] = {
    "domain": ("domain", str),
    "resolution": ("resolution", _positive_integer),
    "flavor": ("flavors", _flavors),
    "dirichlet": ("dirichlet", _labels),
    "robin": ("robin", _robin),
    "dynamic": ("dynamic", _labels),
    "coefficient": ("coefficient", _coefficient),
    "p": ("p_values", _p_values),
    "tasks": ("tasks", _tasks),
    "seed": ("seed", _nonnegative_integer),
    "samples": ("samples", _positive_integer),
    "workers": ("workers", _positive_integer),
    "sector_tolerance": ("sector_tolerance", _positive_number),
    "resolvent_radii": ("resolvent_radii", _radii),
    "ultra_t_min": ("ultra_t_min", _positive_number),
    "ultra_t_max": ("ultra_t_max", _positive_number),
    "ultra_expected_slope": ("ultra_expected_slope", _number),
    "ultra_slope_tolerance": ("ultra_slope_tolerance", _positive_number),
    "plots": ("plots", _boolean),
}


def parse_config(text: str, name: str = "scenario") -> Scenario:
    """
    Parse and validate a scenario file.

    Arguments:
        text: File contents.
        name: Scenario name, used for output naming.

    Return:
        The validated scenario. Raises :class:`ConfigError` with the offending line number.
    """
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        key, separator, value = (part.strip() for part in content.partition("="))
        if not separator or not key:
            raise ConfigError(f"expected 'key = value', got '{content}'", line_number)
        if key not in PARSERS:
            raise ConfigError(f"unknown key '{key}', available: {sorted(PARSERS)}", line_number)
        if key in lines:
            raise ConfigError(f"key '{key}' already given on line {lines[key]}", line_number)
        if not value:
            raise ConfigError(f"key '{key}' has no value", line_number)

        attribute, parser = PARSERS[key]
        try:
            values[attribute] = parser(value)
        except ValueError as exception:
            raise ConfigError(f"bad value for '{key}': {exception}", line_number) from exception
        lines[key] = line_number

    for key in REQUIRED_KEYS:
        if key not in lines:
            raise ConfigError(f"missing required key '{key}'")

    scenario = Scenario(name=name, lines=lines, **values)
    validate(scenario)
    return scenario


def load_config(path: Path) -> Scenario:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exception:
        raise ConfigError(f"could not read scenario file {path}: {exception}") from exception
    return parse_config(text, name=path.stem)


def validate(scenario: Scenario) -> None:
    """
    Checks that involve more than one key.
    """

    def line(key: str) -> Optional[int]:
        return scenario.lines.get(key)

    try:
        available = preset_labels(scenario.domain)
    except ValueError as exception:
        raise ConfigError(str(exception), line("domain")) from exception
    if scenario.domain == "slit_disc" and scenario.resolution < 2:
        raise ConfigError("slit_disc needs resolution at least 2", line("resolution"))
    if "containment" in scenario.tasks and scenario.resolution < 2:
        raise ConfigError(
            "task 'containment' meshes the slit disc and needs resolution at least 2",
            line("resolution"),
        )

    for key, labels in [
        ("dirichlet", scenario.dirichlet),
        ("robin", frozenset(scenario.robin)),
        ("dynamic", scenario.dynamic),
    ]:
        unknown = labels - set(available)
        if unknown:
            raise ConfigError(
                f"labels {sorted(unknown)} do not exist on '{scenario.domain}', "
                f"available: {list(available)}",
                line(key),
            )
    try:
        scenario.partition()
    except ValueError as exception:
        raise ConfigError(str(exception), line("robin") or line("dynamic")) from exception

    if not scenario.tasks:
        raise ConfigError("no tasks given", line("tasks"))
    if "robin" in scenario.tasks and not scenario.robin:
        raise ConfigError("task 'robin' needs Robin coefficients, see key 'robin'", line("tasks"))
    if "dynamic" in scenario.tasks and not scenario.dynamic:
        raise ConfigError(
            "task 'dynamic' needs a dynamic boundary part, see key 'dynamic'", line("tasks")
        )
    if PAIRING_TASKS & set(scenario.tasks) and min(scenario.p_values) < 2:
        raise ConfigError(
            f"tasks {sorted(PAIRING_TASKS & set(scenario.tasks))} need every p >= 2", line("p")
        )
    if scenario.ultra_t_min is not None and scenario.ultra_t_min >= scenario.ultra_t_max:
        raise ConfigError("ultra_t_min must be smaller than ultra_t_max", line("ultra_t_min"))
    if scenario.ultra_t_max > 1:
        raise ConfigError("ultra_t_max must be at most 1", line("ultra_t_max"))
