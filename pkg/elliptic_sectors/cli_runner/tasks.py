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
import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Optional

# Third party libraries
import numpy as np

# Local folder libraries
from .. import DENSE_BUDGET
from ..mesh_fem import (
    AssembledSystem,
    BoundaryPartition,
    FormDomainFlavor,
    Mesh2D,
    assemble,
    generate_mesh,
    square_mesh,
)
from ..operator_lab import (
    HULL_SLACK,
    NUMERICAL_RANGE_HEADER,
    RESOLVENT_HEADER,
    DiscreteOperator,
    FieldOfValuesBoundary,
    NumericalRangeSample,
    field_of_values_boundary,
    numerical_range_p,
    numerical_range_p2,
    resolvent_probes,
    resolvent_rays,
    robin_monotonicity,
    sample_vectors,
    spectrum,
    spectrum_in_numerical_range,
)
from ..regular_geometry import (
    ArclengthSet,
    christ_decompose,
    circle_polyline,
    collar_extension,
    default_regularity_report,
    polyline_preset,
    segment_polyline,
    square_boundary,
    verify_christ_properties,
    verify_mantle,
)
from ..sector_math import CoefficientField
from ..semigroup_lab import (
    CONTRACTION_HEADER,
    ULTRA_HEADER,
    ULTRA_PAIRS,
    contraction_scan,
    default_times,
    mass_drift,
    positivity_check,
    semigroup_law_error,
    ultracontractivity_fit,
)
from ..trace_hardy import (
    DEFAULT_CORPUS,
    DIRICHLET_CATALOG,
    FUNCTION_CATALOG,
    RADIUS_FACTORS,
    averaged_boundary_limit,
    density_ratio,
    equivalent_norm,
    hardy_quotient,
    hardy_sequence,
    read_corpus,
    run_corpus,
)
from .config import TASKS, CoefficientSpec, Scenario

LOGGER = logging.getLogger(__name__)

# Tasks that do not depend on the scenario mesh run once, not once per flavor.
FLAVOR_INDEPENDENT = frozenset(["hardy", "geometry", "containment"])

SEMIGROUP_TIMES = np.geomspace(1e-3, 1.0, 10)
ANALYTICITY_MARGIN = 0.01
SEMIGROUP_LAW_TOLERANCE = 1e-8
MASS_DRIFT_TOLERANCE = 1e-10
ULTRA_TIME_COUNT = 12

HARDY_CONSTANT_RATIO = math.sqrt(2)
HARDY_CONSTANT_RATIO_TOLERANCE = 0.1
HARDY_LINEAR_TOLERANCE = 0.02
HARDY_REFINEMENTS = (16, 32, 64)

# Cell ratio and depth per curve preset. Koch cells split in thirds like the curve itself.
CHRIST_TREES = {"segment": (0.5, 12), "square": (0.5, 12), "koch3": (1 / 3, 8)}
MANTLE_INSTANCES = 20
COLLAR_EPSILON = 0.1

# Containment grid: every geometry, coefficient and boundary variant, at each scenario exponent.
CONTAINMENT_GEOMETRIES = (
    ("square", FormDomainFlavor.SUPPORT_AWAY),
    ("lshape", FormDomainFlavor.SUPPORT_AWAY),
    ("slit_disc", FormDomainFlavor.SUPPORT_AWAY),
    ("slit_disc", FormDomainFlavor.SMOOTH_CLOSURE),
    ("cusp", FormDomainFlavor.SUPPORT_AWAY),
)
# Dirichlet label, then the label with the Robin or dynamic condition.
CONTAINMENT_LABELS = {
    "square": ("left", "bottom"),
    "lshape": ("reentrant", "outer"),
    "slit_disc": ("slit_upper", "circle"),
    "cusp": ("side", "top"),
}
CONTAINMENT_COEFFICIENTS = (
    CoefficientSpec(),
    CoefficientSpec("rotation", (0.5,)),
    CoefficientSpec("rotation", (1.0,)),
    CoefficientSpec("rotation", (2.0,)),
    CoefficientSpec("varying", (1.0,)),
)
CONTAINMENT_ROBIN: tuple[Optional[float], ...] = (0.0, 1.0, None)
CONTAINMENT_TARGET = 100_000

SPECTRUM_HEADER = ["real", "imag"]
FIELD_OF_VALUES_HEADER = ["p", "real", "imag"]
POSITIVITY_HEADER = ["t", "min_entry", "passed", "asserted"]
HARDY_HEADER = [
    "name",
    "expected",
    "hardy_bounded",
    "limits_vanish",
    "approximable",
    "agree",
    "passed",
]
CHRIST_HEADER = ["curve", "depth", "a0", "c1", "measure_constant", "passed"]
MANTLE_HEADER = [
    "instance",
    "rho",
    "generation",
    "c_lower_small",
    "small_scale_bound",
    "c_lower_large",
    "large_scale_bound",
    "passed",
]
ROBIN_HEADER = ["p", "factor", "base", "scaled"]
CONTAINMENT_HEADER = [
    "domain",
    "flavor",
    "coefficient",
    "boundary",
    "p",
    "pairings",
    "max_argument",
    "theta",
    "contained",
]

Table = tuple[list[str], list[list[Any]]]


@dataclass(frozen=True)
class Check:
    """
    One verdict. Checks with ``asserted`` unset are informational and never fail a run.
    """

    name: str
    passed: bool
    asserted: bool = True
    value: Optional[float] = None
    bound: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "asserted": self.asserted,
            "value": self.value,
            "bound": self.bound,
        }


@dataclass
class TaskResult:
    task: str
    flavor: Optional[FormDomainFlavor]
    checks: list[Check] = field(default_factory=list)
    metrics: dict[str, Any] = field(default_factory=dict)
    tables: dict[str, Table] = field(default_factory=dict)
    samples: list[NumericalRangeSample] = field(default_factory=list)
    boundary: Optional[FieldOfValuesBoundary] = None

    @property
    def key(self) -> str:
        return self.task if self.flavor is None else f"{self.task}_{self.flavor.value}"

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if check.asserted)

    def check(
        self,
        name: str,
        passed: bool,
        asserted: bool = True,
        value: Optional[float] = None,
        bound: Optional[float] = None,
    ) -> None:
        self.checks.append(
            Check(
                name=name,
                passed=bool(passed),
                asserted=bool(asserted),
                value=None if value is None else float(value),
                bound=None if bound is None else float(bound),
            )
        )
        if asserted and not passed:
            LOGGER.warning(
                "%s: check '%s' failed (value %s, bound %s)", self.key, name, value, bound
            )

    def table(self, name: str, header: list[str], rows: list[list[Any]]) -> None:
        self.tables[name] = (header, rows)

    def to_dict(self) -> dict[str, Any]:
        return {
            "task": self.task,
            "flavor": None if self.flavor is None else self.flavor.value,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
            "metrics": self.metrics,
        }


@dataclass(frozen=True, eq=False)
class TaskContext:
    """
    The discretized scenario for one form domain flavor. Built lazily and shared by the tasks.
    """

    scenario: Scenario
    flavor: FormDomainFlavor

    @cached_property
    def mesh(self) -> Mesh2D:
        return generate_mesh(self.scenario.domain, self.scenario.resolution)

    @cached_property
    def coefficient(self) -> CoefficientField:
        return self.scenario.coefficient.field(self.mesh.nodes)

    @cached_property
    def system(self) -> AssembledSystem:
        return assemble(self.mesh, self.coefficient, self.scenario.partition(), self.flavor)

    @cached_property
    def operator(self) -> DiscreteOperator:
        return DiscreteOperator(self.system)

    def rng(self, task: str, stream: int = 0) -> np.random.Generator:
        """
        Independent generator per task and stream, fixed by the scenario seed.
        """
        return np.random.default_rng([self.scenario.seed, TASKS.index(task), stream])


def _with_tolerance(sample: NumericalRangeSample, scenario: Scenario) -> NumericalRangeSample:
    return dataclasses.replace(sample, tolerance=scenario.sector_tolerance)


def _pairing_samples(
    operator: DiscreteOperator, context: TaskContext, task: str, first_stream: int = 0
) -> list[NumericalRangeSample]:
    scenario = context.scenario
    samples = []
    for index, p in enumerate(scenario.p_values):
        rng = context.rng(task, first_stream + index)
        if p == 2:
            sample = numerical_range_p2(operator, scenario.samples, rng)
        else:
            sample = numerical_range_p(operator, p, scenario.samples, rng)
        samples.append(_with_tolerance(sample, scenario))
    return samples


def _record_containment(result: TaskResult, samples: list[NumericalRangeSample]) -> None:
    for sample in samples:
        result.check(
            f"pairings in sector p={sample.p:g}",
            sample.contained,
            value=sample.max_argument,
            bound=sample.theta.theta,
        )
        result.metrics[f"p={sample.p:g}"] = sample.to_dict()


def numrange_task(context: TaskContext, result: TaskResult) -> None:
    operator = context.operator
    result.metrics["system"] = context.system.to_dict()
    result.metrics["operator"] = operator.to_dict()

    samples = _pairing_samples(operator, context, "numrange")
    _record_containment(result, samples)
    result.samples = samples
    result.table(
        "numrange",
        NUMERICAL_RANGE_HEADER,
        [row for sample in samples for row in sample.rows()],
    )

    report = spectrum(operator)
    result.metrics["spectrum"] = report.to_dict()
    result.check(
        "spectrum in sector", report.contained, value=report.max_distance, bound=report.scale
    )
    result.check(
        "no eigenvalues on the imaginary axis",
        report.imaginary_axis_count == 0,
        value=report.imaginary_axis_count,
    )
    ordered = sorted(report.eigenvalues, key=lambda value: (value.real, value.imag))
    result.table("spectrum", SPECTRUM_HEADER, [[value.real, value.imag] for value in ordered])

    if operator.size > DENSE_BUDGET:
        LOGGER.info("Skipping the field of values boundary for %d unknowns", operator.size)
        return
    boundary = field_of_values_boundary(operator)
    result.boundary = boundary
    result.check("spectrum in numerical range", spectrum_in_numerical_range(report, boundary))
    scale = max(1.0, float(np.max(np.abs(boundary.support))))
    for sample in samples:
        if sample.p == 2:
            violation = boundary.violation(sample.values)
            result.check(
                "Rayleigh quotients in numerical range",
                violation <= HULL_SLACK * scale,
                value=violation,
                bound=HULL_SLACK * scale,
            )
    result.table("field_of_values", FIELD_OF_VALUES_HEADER, boundary.rows())


def resolvent_task(context: TaskContext, result: TaskResult) -> None:
    scenario = context.scenario
    operator = context.operator
    smallest, largest, count = scenario.resolvent_radii
    radii = np.geomspace(smallest, largest, count)

    rows = []
    for p in scenario.p_values:
        probes = resolvent_probes(
            operator,
            resolvent_rays(operator.theta(p), radii),
            p,
            seed=scenario.seed,
            workers=scenario.workers,
        )
        ratio = max(probe.norm / probe.bound for probe in probes)
        # Only the Hilbert space norm is computed exactly.
        result.check(
            f"resolvent bound p={p:g}",
            all(probe.passed for probe in probes),
            asserted=p == 2,
            value=ratio,
            bound=1.0,
        )
        result.metrics[f"p={p:g}"] = {"probes": len(probes), "max_ratio": ratio}
        rows += [probe.row() for probe in probes]
    result.table("resolvent", RESOLVENT_HEADER, rows)


def semigroup_task(context: TaskContext, result: TaskResult) -> None:
    operator = context.operator
    limit = math.pi / 2 - operator.theta2.theta - ANALYTICITY_MARGIN
    arguments = [0.0, 0.5 * limit, -0.5 * limit, limit, -limit]
    result.metrics["operator"] = operator.to_dict()
    result.metrics["argument_limit"] = limit

    rows = contraction_scan(
        operator, 2, SEMIGROUP_TIMES, arguments=arguments, margin=ANALYTICITY_MARGIN
    )
    for p in (1.0, math.inf):
        rows += contraction_scan(operator, p, SEMIGROUP_TIMES)
    for p in (1.0, 2.0, math.inf):
        selected = [row for row in rows if row.p == p]
        result.check(
            f"contraction p={p:g}",
            all(row.passed for row in selected),
            asserted=selected[0].asserted,
            value=max(row.norm for row in selected),
            bound=1.0,
        )
    result.table("contraction", CONTRACTION_HEADER, [row.row() for row in rows])

    positivity = positivity_check(operator, SEMIGROUP_TIMES)
    result.check(
        "positivity",
        all(row.passed for row in positivity),
        asserted=operator.z_matrix,
        value=min(row.min_entry for row in positivity),
    )
    result.table(
        "positivity",
        POSITIVITY_HEADER,
        [[row.t, row.min_entry, row.passed, row.asserted] for row in positivity],
    )

    second = 0.02 * complex(math.cos(0.5 * limit), math.sin(0.5 * limit))
    law_error = semigroup_law_error(operator, 0.01, second)
    result.check(
        "semigroup law",
        law_error <= SEMIGROUP_LAW_TOLERANCE,
        value=law_error,
        bound=SEMIGROUP_LAW_TOLERANCE,
    )

    partition = context.scenario.partition()
    if not partition.dirichlet and not partition.robin:
        initial = context.rng("semigroup").standard_normal(operator.size)
        drift = mass_drift(operator, initial, SEMIGROUP_TIMES)
        result.check(
            "mass conservation",
            drift <= MASS_DRIFT_TOLERANCE,
            value=drift,
            bound=MASS_DRIFT_TOLERANCE,
        )


def ultra_task(context: TaskContext, result: TaskResult) -> None:
    scenario = context.scenario
    operator = context.operator
    if scenario.ultra_t_min is None:
        times = default_times(operator, ULTRA_TIME_COUNT)
        times = times[times <= scenario.ultra_t_max]
    else:
        times = np.geomspace(scenario.ultra_t_min, scenario.ultra_t_max, ULTRA_TIME_COUNT)

    rows = []
    for pair in ULTRA_PAIRS:
        source, target = pair
        # A slope for the pair (1, inf) scales to the others by the exponent gap.
        expected = (
            None
            if scenario.ultra_expected_slope is None
            else scenario.ultra_expected_slope * (1 / source - 1 / target)
        )
        report = ultracontractivity_fit(
            operator,
            times,
            pair=pair,
            expected_slope=expected,
            slope_tolerance=scenario.ultra_slope_tolerance,
            workers=scenario.workers,
        )
        name = f"{source:g}->{target:g}"
        result.metrics[name] = report.to_dict()
        result.check(f"fit residual {name}", report.reliable, asserted=False, value=report.residual)
        if report.within_expected is not None:
            result.check(
                f"slope {name}",
                report.within_expected,
                asserted=pair == (1.0, math.inf),
                value=report.slope,
                bound=expected,
            )
        rows += report.rows()
    result.table("ultra", ULTRA_HEADER, rows)


def hardy_task(context: TaskContext, result: TaskResult) -> None:
    scenario = context.scenario
    left = DIRICHLET_CATALOG["left"]()

    rows = []
    for p in scenario.p_values:
        corpus = run_corpus(read_corpus(DEFAULT_CORPUS), p=p, workers=scenario.workers)
        for entry in corpus:
            name = f"{entry.entry.name} p={p:g}"
            result.check(f"membership {name}", entry.passed, asserted=entry.asserted)
            result.metrics[name] = entry.to_dict()
            verdict = entry.verdict
            rows.append(
                [
                    name,
                    entry.entry.expected,
                    verdict.hardy_bounded,
                    verdict.limits_vanish,
                    verdict.approximable,
                    verdict.agree,
                    entry.passed,
                ]
            )
    result.table("hardy", HARDY_HEADER, rows)

    meshes = [square_mesh(resolution) for resolution in HARDY_REFINEMENTS]
    constant = hardy_sequence(FUNCTION_CATALOG["one"], left, meshes, 2.0)
    ratio = constant[-1].growth_ratio
    deviation = math.inf if ratio is None else abs(ratio / HARDY_CONSTANT_RATIO - 1)
    result.check(
        "constant function quotient grows like h^(-1/2)",
        deviation <= HARDY_CONSTANT_RATIO_TOLERANCE,
        value=ratio,
        bound=HARDY_CONSTANT_RATIO,
    )

    finest = meshes[-1]
    linear = FUNCTION_CATALOG["x"](finest.nodes)
    quotient = hardy_quotient(finest, linear, left, 2.0)
    result.check(
        "linear function quotient",
        abs(quotient - 1) <= HARDY_LINEAR_TOLERANCE,
        value=quotient,
        bound=1.0,
    )
    doubled = hardy_quotient(finest, 2 * linear, left, 2.0)
    result.check(
        "quotient is homogeneous",
        math.isclose(doubled, 2 * quotient, rel_tol=1e-12),
        value=doubled / quotient,
        bound=2.0,
    )
    result.metrics["equivalent_norm x"] = equivalent_norm(finest, linear, left, 2.0)

    middle = meshes[1]
    point = np.array([0.0, 0.5])
    radii = [factor * middle.h for factor in RADIUS_FACTORS]
    limit = averaged_boundary_limit(middle, np.ones(middle.node_count), point, radii).limit
    result.check(
        "constant function averaged limit", 0.45 <= limit <= 0.55, value=limit, bound=0.5
    )
    result.metrics["density_ratio edge"] = density_ratio(middle, point, radii).tolist()
    result.metrics["density_ratio corner"] = density_ratio(middle, [0.0, 0.0], radii).tolist()


def _random_subset(rng: np.random.Generator, total_length: float) -> ArclengthSet:
    pieces = []
    for _ in range(int(rng.integers(1, 4))):
        start = rng.uniform(0.0, 0.9 * total_length)
        pieces.append((start, start + rng.uniform(0.0, 0.1 * total_length)))
    return ArclengthSet.from_intervals(pieces)


def geometry_task(context: TaskContext, result: TaskResult) -> None:
    christ_rows = []
    trees = {}
    for name, (delta, generations) in CHRIST_TREES.items():
        tree = christ_decompose(polyline_preset(name), delta, generations)
        trees[name] = tree
        report = verify_christ_properties(tree)
        result.check(f"cell properties {name}", report.passed, value=report.measure_constant)
        result.metrics[f"christ {name}"] = report.to_dict()
        christ_rows.append(
            [name, tree.depth, report.a0, report.c1, report.measure_constant, report.passed]
        )
    result.table("christ", CHRIST_HEADER, christ_rows)

    tree = trees["segment"]
    rng = context.rng("geometry")
    mantle_rows = []
    for instance in range(MANTLE_INSTANCES):
        xi = _random_subset(rng, tree.curve.total_length)
        rho = float(rng.uniform(0.01, 0.2))
        mantle = verify_mantle(xi, rho, tree)
        mantle_rows.append(
            [
                instance,
                rho,
                mantle.generation,
                mantle.c_lower_small,
                mantle.small_scale_bound,
                mantle.c_lower_large,
                mantle.large_scale_bound,
                mantle.passed,
            ]
        )
    result.check(
        "regular mantles",
        all(row[-1] for row in mantle_rows),
        value=sum(bool(row[-1]) for row in mantle_rows),
        bound=MANTLE_INSTANCES,
    )
    result.table("mantle", MANTLE_HEADER, mantle_rows)

    bottom = segment_polyline((0.0, 0.0), (1.0, 0.0))
    collar = collar_extension(square_boundary(), bottom, COLLAR_EPSILON)
    distance = collar.set_distance(bottom) if not collar.is_empty else 0.0
    result.check(
        "collar keeps away from the Dirichlet part",
        not collar.is_empty and distance >= COLLAR_EPSILON / 2,
        value=distance,
        bound=COLLAR_EPSILON / 2,
    )

    circle = default_regularity_report(circle_polyline())
    result.check("circle is regular", circle.passed, value=circle.c_lower)
    result.metrics["circle"] = circle.to_dict()


def robin_task(context: TaskContext, result: TaskResult) -> None:
    scenario = context.scenario
    operator = context.operator
    result.metrics["robin"] = dict(sorted(scenario.robin.items()))
    _record_containment(result, _pairing_samples(operator, context, "robin"))

    rng = context.rng("robin", len(scenario.p_values))
    vectors = sample_vectors(operator, scenario.samples, rng)
    rows = []
    for p in scenario.p_values:
        monotonicity = robin_monotonicity(context.system, vectors, p)
        result.check(
            f"Robin monotonicity p={p:g}",
            monotonicity.passed,
            value=monotonicity.to_dict()["min_increase"],
        )
        rows += [
            [p, monotonicity.factor, base, scaled]
            for base, scaled in zip(monotonicity.base, monotonicity.scaled)
        ]
    result.table("robin", ROBIN_HEADER, rows)


def dynamic_task(context: TaskContext, result: TaskResult) -> None:
    operator = DiscreteOperator(context.system, dynamic=True)
    operator.require_dense("The dynamic boundary task")
    result.metrics["operator"] = operator.to_dict()
    result.metrics["dynamic_edges"] = context.system.dynamic_edges.count

    # Raises if the product mass is not positive definite.
    _ = operator.mass_factor
    rows = contraction_scan(operator, 2, SEMIGROUP_TIMES)
    result.check(
        "product norm contraction",
        all(row.passed for row in rows),
        value=max(row.norm for row in rows),
        bound=1.0,
    )
    result.table("dynamic", CONTRACTION_HEADER, [row.row() for row in rows])
    _record_containment(result, _pairing_samples(operator, context, "dynamic"))


@dataclass(frozen=True)
class ContainmentCell:
    """
    One discretization of the containment grid. ``robin`` is the coefficient on the second label
    of the domain, or None for a dynamic condition there.
    """

    domain: str
    flavor: FormDomainFlavor
    coefficient: CoefficientSpec
    robin: Optional[float]

    @property
    def boundary(self) -> str:
        return "dynamic" if self.robin is None else f"robin {self.robin:g}"

    def operator(self, resolution: int) -> DiscreteOperator:
        mesh = generate_mesh(self.domain, resolution)
        dirichlet, other = CONTAINMENT_LABELS[self.domain]
        if self.robin is None:
            partition = BoundaryPartition(
                dirichlet=frozenset([dirichlet]), dynamic=frozenset([other])
            )
        else:
            partition = BoundaryPartition(
                dirichlet=frozenset([dirichlet]), robin={other: self.robin}
            )
        system = assemble(mesh, self.coefficient.field(mesh.nodes), partition, self.flavor)
        return DiscreteOperator(system, dynamic=self.robin is None)


def containment_cells() -> list[ContainmentCell]:
    return [
        ContainmentCell(domain=domain, flavor=flavor, coefficient=coefficient, robin=robin)
        for domain, flavor in CONTAINMENT_GEOMETRIES
        for coefficient in CONTAINMENT_COEFFICIENTS
        for robin in CONTAINMENT_ROBIN
    ]


def containment_task(context: TaskContext, result: TaskResult) -> None:
    scenario = context.scenario
    cells = containment_cells()
    streams = len(scenario.p_values)

    def evaluate(index: int) -> list[NumericalRangeSample]:
        operator = cells[index].operator(scenario.resolution)
        return _pairing_samples(operator, context, "containment", first_stream=index * streams)

    with ThreadPoolExecutor(max_workers=scenario.workers) as executor:
        evaluated = list(executor.map(evaluate, range(len(cells))))

    rows = []
    for cell, samples in zip(cells, evaluated):
        rows += [
            [
                cell.domain,
                cell.flavor.value,
                cell.coefficient.describe(),
                cell.boundary,
                sample.p,
                len(sample.values),
                sample.max_argument,
                sample.theta.theta,
                sample.contained,
            ]
            for sample in samples
        ]
    result.table("containment", CONTAINMENT_HEADER, rows)

    for domain, flavor in CONTAINMENT_GEOMETRIES:
        samples = [
            sample
            for cell, cell_samples in zip(cells, evaluated)
            if (cell.domain, cell.flavor) == (domain, flavor)
            for sample in cell_samples
        ]
        result.check(
            f"pairings in sector {domain} {flavor.value}",
            all(sample.contained for sample in samples),
            value=min(sample.margin for sample in samples),
            bound=-scenario.sector_tolerance,
        )

    pairings = sum(row[5] for row in rows)
    result.metrics["cells"] = len(cells)
    result.metrics["pairings"] = pairings
    result.metrics["violations"] = sum(not row[-1] for row in rows)
    result.check(
        "pairing count",
        pairings >= CONTAINMENT_TARGET,
        asserted=False,
        value=pairings,
        bound=CONTAINMENT_TARGET,
    )


TASK_FUNCTIONS: dict[str, Callable[[TaskContext, TaskResult], None]] = {
    "numrange": numrange_task,
    "resolvent": resolvent_task,
    "semigroup": semigroup_task,
    "ultra": ultra_task,
    "hardy": hardy_task,
    "geometry": geometry_task,
    "robin": robin_task,
    "dynamic": dynamic_task,
    "containment": containment_task,
}
