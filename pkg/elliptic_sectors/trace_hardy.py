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
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence, Union

# Third party libraries
import numpy as np
import numpy.typing as npt
from scipy.sparse import linalg as sparse_linalg

# Local folder libraries
from .mesh_fem import (
    INTERIOR_RULE_POINTS,
    INTERIOR_RULE_WEIGHTS,
    BoundaryPartition,
    Mesh2D,
    assemble,
    element_gradients,
    quadrature_points,
    square_mesh,
)
from .regular_geometry import PolylineSet, segment_polyline
from .sector_math import CoefficientField

LOGGER = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
Function = Callable[[FloatArray], npt.ArrayLike]

# Quotients growing by at most this factor per halving of h count as bounded.
HARDY_BOUNDED_RATIO = 1.15
# Averaged limits below this fraction of max |u| count as vanishing.
LIMIT_VANISH_FRACTION = 0.05
# Relative approximation distance at or below which u counts as approximable.
APPROXIMABLE_RATIO = 0.25
SUBDIVISION_DEPTH = 6
# Averaging radii are multiples of the mesh width of the finest mesh.
RADIUS_FACTORS = (2.0, 4.0, 8.0)
# Cutoff distances are multiples of the mesh width, the smallest one only removes nodes on D.
EPSILON_FACTORS = (3.5, 2.5, 1.5, 0.5)


@dataclass(frozen=True)
class HardyRecord:
    h: float
    p: float
    quotient: float
    growth_ratio: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "h": self.h,
            "p": self.p,
            "quotient": self.quotient,
            "growth_ratio": self.growth_ratio,
        }


def _node_values(mesh: Mesh2D, values: npt.ArrayLike) -> FloatArray:
    result: FloatArray = np.asarray(values, dtype=np.float64).reshape(-1)
    if len(result) != mesh.node_count:
        raise ValueError(f"Expected {mesh.node_count} nodal values, got {len(result)}")
    return result


def hardy_quotient(
    mesh: Mesh2D, values: npt.ArrayLike, dirichlet: PolylineSet, p: float = 2.0
) -> float:
    """
    ``|| u / dist(., D) ||_p`` by the interior rule, whose points never lie on the boundary.
    """
    if p < 1:
        raise ValueError(f"Exponent p must be at least 1, got {p}")
    if dirichlet.is_empty:
        raise ValueError("Hardy quotient needs a nonempty Dirichlet part")
    nodal = _node_values(mesh, values)

    points = quadrature_points(mesh)
    distances = dirichlet.distance(points)
    if np.any(distances <= 0):
        raise ValueError("A quadrature point lies on the Dirichlet part")
    point_values = nodal[mesh.triangles] @ INTERIOR_RULE_POINTS.T
    weights = mesh.areas[:, None] * INTERIOR_RULE_WEIGHTS[None, :]
    return float(np.sum(weights * np.abs(point_values / distances) ** p) ** (1 / p))


def hardy_sequence(
    function: Function, dirichlet: PolylineSet, meshes: Sequence[Mesh2D], p: float = 2.0
) -> list[HardyRecord]:
    """
    Hardy quotients of the nodal interpolant on successively finer meshes, with the ratio to the
    previous quotient.
    """
    records: list[HardyRecord] = []
    for mesh in meshes:
        quotient = hardy_quotient(mesh, function(mesh.nodes), dirichlet, p)
        ratio = quotient / records[-1].quotient if records and records[-1].quotient > 0 else None
        records.append(HardyRecord(h=mesh.h, p=p, quotient=quotient, growth_ratio=ratio))
    return records


def sobolev_norm(mesh: Mesh2D, values: npt.ArrayLike, p: float = 2.0) -> float:
    """
    ``(int |u|^p + int |grad u|^p)^(1/p)`` of a P1 function.
    """
    nodal = _node_values(mesh, values)
    local = nodal[mesh.triangles]
    point_values = local @ INTERIOR_RULE_POINTS.T
    gradients = np.einsum("mi,mik->mk", local, element_gradients(mesh.nodes, mesh.triangles))
    value_part = np.sum(mesh.areas[:, None] * INTERIOR_RULE_WEIGHTS * np.abs(point_values) ** p)
    gradient_part = np.sum(mesh.areas * np.linalg.norm(gradients, axis=1) ** p)
    return float((value_part + gradient_part) ** (1 / p))


def equivalent_norm(
    mesh: Mesh2D, values: npt.ArrayLike, dirichlet: PolylineSet, p: float = 2.0
) -> float:
    """
    ``||u||_{W^{1,p}} + ||u / dist(., D)||_p``, equivalent to the Sobolev norm on functions
    vanishing on D when D is regular.
    """
    return sobolev_norm(mesh, values, p) + hardy_quotient(mesh, values, dirichlet, p)


def _triangle_distances(corners: FloatArray, center: FloatArray) -> FloatArray:
    """
    Distance from ``center`` to each triangle of shape (k, 3, 2), zero inside.
    """
    following = np.roll(corners, -1, axis=1)
    edges = following - corners
    offsets = center[None, None, :] - corners
    lengths = np.maximum(np.sum(edges**2, axis=-1), 1e-300)
    fraction = np.clip(np.sum(offsets * edges, axis=-1) / lengths, 0.0, 1.0)
    nearest = corners + fraction[..., None] * edges
    distances = np.linalg.norm(center[None, None, :] - nearest, axis=-1).min(axis=1)

    crosses = edges[..., 0] * offsets[..., 1] - edges[..., 1] * offsets[..., 0]
    inside = np.all(crosses >= 0, axis=1) | np.all(crosses <= 0, axis=1)
    result: FloatArray = np.where(inside, 0.0, distances)
    return result


def _subdivide(corners: FloatArray, values: FloatArray) -> tuple[FloatArray, FloatArray]:
    """
    Split each triangle into four through its edge midpoints, values interpolated linearly.
    """
    first, second, third = corners[:, 0], corners[:, 1], corners[:, 2]
    a, b, c = values[:, 0], values[:, 1], values[:, 2]
    m01, m12, m20 = (first + second) / 2, (second + third) / 2, (third + first) / 2
    v01, v12, v20 = (a + b) / 2, (b + c) / 2, (c + a) / 2
    children = np.concatenate(
        [
            np.stack([first, m01, m20], axis=1),
            np.stack([m01, second, m12], axis=1),
            np.stack([m20, m12, third], axis=1),
            np.stack([m01, m12, m20], axis=1),
        ]
    )
    child_values = np.concatenate(
        [
            np.stack([a, v01, v20], axis=1),
            np.stack([v01, b, v12], axis=1),
            np.stack([v20, v12, c], axis=1),
            np.stack([v01, v12, v20], axis=1),
        ]
    )
    return children, child_values


def ball_integral(
    mesh: Mesh2D,
    values: npt.ArrayLike,
    center: npt.ArrayLike,
    radius: float,
    depth: int = SUBDIVISION_DEPTH,
) -> tuple[float, float]:
    """
    ``int |u|`` and the area over ``B(center, radius)`` intersected with the domain.

    Triangles inside the ball use the interior rule, triangles cut by the circle are split into
    four, ``depth`` times, after which the centroid decides.
    """
    if not radius > 0:
        raise ValueError(f"Radius must be positive, got {radius}")
    point = np.asarray(center, dtype=np.float64).reshape(2)
    corners = mesh.nodes[mesh.triangles]
    corner_values = np.abs(_node_values(mesh, values))[mesh.triangles]

    integral = 0.0
    area = 0.0
    for level in range(depth + 1):
        first = corners[:, 1] - corners[:, 0]
        second = corners[:, 2] - corners[:, 0]
        areas = 0.5 * np.abs(first[:, 0] * second[:, 1] - first[:, 1] * second[:, 0])
        inside = np.all(np.linalg.norm(corners - point, axis=-1) <= radius, axis=1)
        outside = _triangle_distances(corners, point) >= radius
        integral += float(
            np.sum(areas[inside] * (corner_values[inside] @ INTERIOR_RULE_POINTS.T).mean(axis=1))
        )
        area += float(np.sum(areas[inside]))

        cut = ~inside & ~outside
        if level == depth:
            centroids = corners[cut].mean(axis=1)
            hit = np.linalg.norm(centroids - point, axis=1) <= radius
            integral += float(np.sum(areas[cut][hit] * corner_values[cut][hit].mean(axis=1)))
            area += float(np.sum(areas[cut][hit]))
            break
        if not np.any(cut):
            break
        corners, corner_values = _subdivide(corners[cut], corner_values[cut])
    return integral, area


@dataclass(frozen=True, eq=False)
class AveragedLimitRecord:
    """
    Averages ``A_r = |B_r|^-1 int_{B_r(x) cap domain} |u|`` and their extrapolation to r = 0.
    """

    point: FloatArray
    radii: FloatArray
    averages: FloatArray
    resolved: npt.NDArray[np.bool_]
    limit: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "point": self.point.tolist(),
            "radii": self.radii.tolist(),
            "averages": self.averages.tolist(),
            "resolved": self.resolved.tolist(),
            "limit": self.limit,
        }


def averaged_boundary_limit(
    mesh: Mesh2D,
    values: npt.ArrayLike,
    point: npt.ArrayLike,
    radii: Sequence[float],
    depth: int = SUBDIVISION_DEPTH,
) -> AveragedLimitRecord:
    """
    Limit of the ball averages of ``|u|`` at a boundary point.

    Radii below ``2 h`` are flagged as unresolved and left out of the extrapolation, which is
    linear in r through the two smallest resolved radii.
    """
    location = np.asarray(point, dtype=np.float64).reshape(2)
    if float(mesh.boundary_polyline().distance(location[None, :])[0]) > 1e-9:
        raise ValueError(f"Point {location.tolist()} is not on the boundary of '{mesh.name}'")
    ordered = np.sort(np.asarray(radii, dtype=np.float64).reshape(-1))
    if len(ordered) == 0 or ordered[0] <= 0:
        raise ValueError("Radii must be positive")

    averages = np.array(
        [ball_integral(mesh, values, location, radius, depth)[0] for radius in ordered]
    ) / (np.pi * ordered**2)
    resolved = ordered >= 2 * mesh.h * (1 - 1e-12)
    usable = np.flatnonzero(resolved)
    if len(usable) < 2:
        raise ValueError(
            f"Extrapolation needs two radii of at least 2 h = {2 * mesh.h:.4g}, got "
            f"{ordered.tolist()}"
        )
    first, second = usable[:2]
    r1, r2 = ordered[first], ordered[second]
    limit = float((r2 * averages[first] - r1 * averages[second]) / (r2 - r1))
    return AveragedLimitRecord(
        point=location, radii=ordered, averages=averages, resolved=resolved, limit=limit
    )


def density_ratio(
    mesh: Mesh2D, point: npt.ArrayLike, radii: Union[float, Sequence[float]]
) -> FloatArray:
    """
    ``|B_r(x) cap domain| / |B_r|`` for each radius. One half at a smooth boundary point, tending
    to zero at an outward cusp.
    """
    radius_array = np.atleast_1d(np.asarray(radii, dtype=np.float64))
    if np.any(radius_array <= 0):
        raise ValueError(f"Radii must be positive, got {radius_array}")
    ones = np.ones(mesh.node_count)
    areas = [ball_integral(mesh, ones, point, radius)[1] for radius in radius_array]
    result: FloatArray = np.asarray(areas) / (math.pi * radius_array**2)
    return result


@dataclass(frozen=True, eq=False)
class ApproximabilityRecord:
    """
    Distance from u to functions vanishing on the nodes within ``epsilon`` of D, in the
    ``W^{1,p}`` norm, for decreasing ``epsilon``.
    """

    h: float
    epsilons: FloatArray
    distances: FloatArray
    norm: float

    @property
    def relative(self) -> float:
        if self.norm == 0:
            return 0.0
        return float(self.distances[-1]) / self.norm

    def to_dict(self) -> dict[str, Any]:
        return {
            "h": self.h,
            "epsilons": self.epsilons.tolist(),
            "distances": self.distances.tolist(),
            "norm": self.norm,
            "relative": self.relative,
        }


def approximation_distance(
    mesh: Mesh2D,
    values: npt.ArrayLike,
    dirichlet: PolylineSet,
    epsilon: float,
    p: float = 2.0,
) -> float:
    """
    Distance from u to discrete functions that vanish on every node closer than ``epsilon`` to D.

    For ``p = 2`` this is the exact ``H^1`` projection distance, a Schur complement of the Gram
    matrix. Other exponents use the nodal cutoff of u itself, an upper bound.
    """
    nodal = _node_values(mesh, values)
    cut = dirichlet.distance(mesh.nodes) < epsilon
    if not np.any(cut):
        return 0.0
    if p != 2:
        return sobolev_norm(mesh, np.where(cut, nodal, 0.0), p)

    identity = CoefficientField.constant(np.eye(2), name="identity")
    system = assemble(mesh, identity, BoundaryPartition())
    gram = (system.stiffness + system.mass).tocsr()
    cut_nodes = np.flatnonzero(cut)
    free_nodes = np.flatnonzero(~cut)
    cut_values = nodal[cut_nodes]
    energy = float(cut_values @ (gram[cut_nodes][:, cut_nodes] @ cut_values))
    if len(free_nodes):
        coupling = gram[free_nodes][:, cut_nodes] @ cut_values
        correction = sparse_linalg.spsolve(gram[free_nodes][:, free_nodes].tocsc(), coupling)
        energy -= float(coupling @ correction)
    return math.sqrt(max(energy, 0.0))


def approximability(
    mesh: Mesh2D,
    values: npt.ArrayLike,
    dirichlet: PolylineSet,
    p: float = 2.0,
    epsilon_factors: Sequence[float] = EPSILON_FACTORS,
) -> ApproximabilityRecord:
    epsilons = np.array(sorted(epsilon_factors, reverse=True), dtype=np.float64) * mesh.h
    distances = np.array(
        [approximation_distance(mesh, values, dirichlet, epsilon, p) for epsilon in epsilons]
    )
    return ApproximabilityRecord(
        h=mesh.h, epsilons=epsilons, distances=distances, norm=sobolev_norm(mesh, values, p)
    )


def _smoothstep(values: FloatArray) -> FloatArray:
    clipped = np.clip(values, 0.0, 1.0)
    result: FloatArray = clipped * clipped * (3 - 2 * clipped)
    return result


FUNCTION_CATALOG: dict[str, Function] = {
    "x": lambda points: points[:, 0],
    "x_gauss": lambda points: points[:, 0] * np.exp(-((points[:, 1] - 0.5) ** 2)),
    "cutoff_strip": lambda points: _smoothstep((points[:, 0] - 0.25) / 0.25),
    "x_squared": lambda points: points[:, 0] ** 2,
    "one": lambda points: np.ones(len(points)),
    "one_plus_cos": lambda points: 1 + 0.5 * np.cos(np.pi * points[:, 1]),
    "y": lambda points: points[:, 1],
}

DIRICHLET_CATALOG: dict[str, Callable[[], PolylineSet]] = {
    "left": lambda: segment_polyline((0.0, 0.0), (0.0, 1.0)),
    "corner": lambda: PolylineSet.point((0.0, 0.0)),
}

EXPECTATIONS = ("member", "nonmember", "boundary")

DEFAULT_CORPUS = """\
# function      dirichlet   expected
x               left        member
x_gauss         left        member
cutoff_strip    left        member
x_squared       left        member
one             left        nonmember
one_plus_cos    left        nonmember
y               left        nonmember
# A single point has capacity zero in the plane, the criteria need not agree there.
one             corner      boundary
"""


@dataclass(frozen=True)
class CorpusEntry:
    function: str
    dirichlet: str
    expected: str

    @property
    def name(self) -> str:
        return f"{self.function}@{self.dirichlet}"


def read_corpus(text: str) -> list[CorpusEntry]:
    """
    One entry per line: function name, Dirichlet set name and expected verdict.
    Text after "#" is ignored.
    """
    entries = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        fields = content.split()
        if len(fields) != 3:
            raise ValueError(f"Line {line_number}: expected 'function dirichlet expected'")
        function, dirichlet, expected = fields
        if function not in FUNCTION_CATALOG:
            raise ValueError(
                f"Line {line_number}: unknown function '{function}', "
                f"available: {sorted(FUNCTION_CATALOG)}"
            )
        if dirichlet not in DIRICHLET_CATALOG:
            raise ValueError(
                f"Line {line_number}: unknown Dirichlet set '{dirichlet}', "
                f"available: {sorted(DIRICHLET_CATALOG)}"
            )
        if expected not in EXPECTATIONS:
            raise ValueError(
                f"Line {line_number}: expected verdict must be one of {EXPECTATIONS}, "
                f"got '{expected}'"
            )
        entries.append(CorpusEntry(function=function, dirichlet=dirichlet, expected=expected))
    return entries


@dataclass(frozen=True, eq=False)
class MembershipVerdict:
    """
    Three discrete criteria for u belonging to the form domain with Dirichlet part D: bounded
    Hardy quotients, vanishing averaged boundary limits and approximability by functions
    supported away from D.
    """

    name: str
    hardy: list[HardyRecord]
    limits: list[AveragedLimitRecord]
    approximation: list[ApproximabilityRecord]
    max_modulus: float

    @property
    def hardy_bounded(self) -> bool:
        ratio = self.hardy[-1].growth_ratio
        return ratio is None or ratio <= HARDY_BOUNDED_RATIO

    @property
    def limits_vanish(self) -> bool:
        threshold = LIMIT_VANISH_FRACTION * max(self.max_modulus, 1e-300)
        return all(abs(record.limit) <= threshold for record in self.limits)

    @property
    def approximable(self) -> bool:
        relatives = [record.relative for record in self.approximation]
        decreasing = all(
            later <= earlier * 1.01 + 1e-12 for earlier, later in zip(relatives, relatives[1:])
        )
        return decreasing and relatives[-1] <= APPROXIMABLE_RATIO

    @property
    def verdicts(self) -> tuple[bool, bool, bool]:
        return self.hardy_bounded, self.limits_vanish, self.approximable

    @property
    def agree(self) -> bool:
        return len(set(self.verdicts)) == 1

    @property
    def member(self) -> Optional[bool]:
        return self.hardy_bounded if self.agree else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "hardy_bounded": self.hardy_bounded,
            "limits_vanish": self.limits_vanish,
            "approximable": self.approximable,
            "agree": self.agree,
            "hardy": [record.to_dict() for record in self.hardy],
            "limits": [record.to_dict() for record in self.limits],
            "approximation": [record.to_dict() for record in self.approximation],
        }


def sample_points(dirichlet: PolylineSet) -> FloatArray:
    """
    Points of D at a quarter, half and three quarters of its length, or the point itself.
    """
    if dirichlet.total_length == 0:
        result: FloatArray = dirichlet.starts[:1].copy()
        return result
    return dirichlet.point_at(dirichlet.total_length * np.array([0.25, 0.5, 0.75]))


def membership_experiment(
    name: str,
    function: Function,
    dirichlet: PolylineSet,
    meshes: Sequence[Mesh2D],
    p: float = 2.0,
) -> MembershipVerdict:
    """
    Run all three criteria for one function on a sequence of refining meshes.
    The averaged limits use the finest mesh.
    """
    if len(meshes) < 3:
        raise ValueError(f"Membership experiment needs at least three meshes, got {len(meshes)}")
    finest = meshes[-1]
    nodal = np.asarray(function(finest.nodes), dtype=np.float64)
    radii = [factor * finest.h for factor in RADIUS_FACTORS]
    limits = [
        averaged_boundary_limit(finest, nodal, point, radii) for point in sample_points(dirichlet)
    ]
    approximation = [
        approximability(mesh, function(mesh.nodes), dirichlet, p) for mesh in meshes
    ]
    verdict = MembershipVerdict(
        name=name,
        hardy=hardy_sequence(function, dirichlet, meshes, p),
        limits=limits,
        approximation=approximation,
        max_modulus=float(np.max(np.abs(nodal))),
    )
    LOGGER.debug("Membership of %s: %s", name, verdict.verdicts)
    return verdict


@dataclass(frozen=True, eq=False)
class CorpusResult:
    entry: CorpusEntry
    verdict: MembershipVerdict

    @property
    def asserted(self) -> bool:
        return self.entry.expected != "boundary"

    @property
    def passed(self) -> bool:
        if not self.asserted:
            return True
        return self.verdict.agree and self.verdict.member == (self.entry.expected == "member")

    def to_dict(self) -> dict[str, Any]:
        return {
            "expected": self.entry.expected,
            "asserted": self.asserted,
            "passed": self.passed,
            **self.verdict.to_dict(),
        }


def run_corpus(
    entries: Sequence[CorpusEntry],
    resolutions: Sequence[int] = (8, 16, 32),
    p: float = 2.0,
    workers: int = 1,
) -> list[CorpusResult]:
    """
    Membership experiments on the unit square for every corpus entry, in corpus order.
    """
    meshes = [square_mesh(resolution) for resolution in resolutions]

    def run(entry: CorpusEntry) -> CorpusResult:
        verdict = membership_experiment(
            entry.name,
            FUNCTION_CATALOG[entry.function],
            DIRICHLET_CATALOG[entry.dirichlet](),
            meshes,
            p,
        )
        return CorpusResult(entry=entry, verdict=verdict)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        return list(executor.map(run, entries))
