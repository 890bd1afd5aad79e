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
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

# Third party libraries
import numpy as np
import numpy.typing as npt
from scipy import sparse

# Local folder libraries
from .regular_geometry import PolylineSet
from .sector_math import CoefficientField, SectorAngle, coefficient_constants

LOGGER = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

# Barycentric points of the degree-2 interior rule, weight 1/3 each. No point lies on an edge.
INTERIOR_RULE_POINTS = np.array(
    [[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]]
)
INTERIOR_RULE_WEIGHTS = np.full(3, 1 / 3)

# Three-point Gauss rule on [0, 1].
EDGE_RULE_POINTS = np.array([0.5 - math.sqrt(0.15), 0.5, 0.5 + math.sqrt(0.15)])
EDGE_RULE_WEIGHTS = np.array([5 / 18, 8 / 18, 5 / 18])

_REFERENCE_MASS = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12
_REFERENCE_EDGE_MASS = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6


class FormDomainFlavor(Enum):
    """
    Which form domain the discretization models.
    The two only differ on meshes with a slit.
    """

    # Functions may jump across the slit.
    SUPPORT_AWAY = "support_away"
    # Restrictions of functions defined across the slit, so duplicated slit nodes are identified.
    SMOOTH_CLOSURE = "smooth_closure"


@dataclass(frozen=True, eq=False)
class Mesh2D:
    """
    Conforming triangulation with labeled boundary edges.

    ``slit_pairs`` lists (duplicate, original) node pairs created when a slit was cut, so that the
    two sides of the slit carry independent nodes.
    ``edge_robin`` holds per-edge Robin coefficients read from a mesh file, zero by default.
    """

    nodes: FloatArray
    triangles: IntArray
    boundary_edges: IntArray
    edge_labels: tuple[str, ...]
    slit_pairs: IntArray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    edge_robin: Optional[FloatArray] = None
    name: str = "mesh"

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=np.float64).reshape(-1, 2)
        triangles = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        edges = np.array(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        slit_pairs = np.array(self.slit_pairs, dtype=np.int64).reshape(-1, 2)
        labels = tuple(self.edge_labels)
        robin = (
            np.zeros(len(edges))
            if self.edge_robin is None
            else np.array(self.edge_robin, dtype=np.float64).reshape(-1)
        )

        if len(labels) != len(edges) or len(robin) != len(edges):
            raise ValueError(
                f"Got {len(edges)} boundary edges but {len(labels)} labels and "
                f"{len(robin)} Robin values"
            )
        if any(not label for label in labels):
            raise ValueError("Boundary edge labels must be nonempty")
        for array, what in [(triangles, "triangle"), (edges, "edge"), (slit_pairs, "slit")]:
            if array.size and (array.min() < 0 or array.max() >= len(nodes)):
                raise ValueError(f"A {what} refers to a node outside 0..{len(nodes) - 1}")
        if np.any(robin < 0):
            raise ValueError("Robin coefficient must be nonnegative")

        areas = _signed_areas(nodes, triangles)
        if np.any(areas <= 0):
            raise ValueError(
                f"Triangles must be counter-clockwise with positive area, "
                f"triangle {int(np.argmin(areas))} has area {float(np.min(areas))}"
            )

        counts = _edge_counts(triangles)
        if any(count > 2 for count in counts.values()):
            raise ValueError("Mesh is not conforming: an edge is shared by more than two triangles")
        for edge in edges:
            if counts.get(_edge_key(edge), 0) != 1:
                raise ValueError(f"Labeled edge {edge.tolist()} is not a boundary edge")

        for array in [nodes, triangles, edges, slit_pairs, robin]:
            array.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "triangles", triangles)
        object.__setattr__(self, "boundary_edges", edges)
        object.__setattr__(self, "edge_labels", labels)
        object.__setattr__(self, "slit_pairs", slit_pairs)
        object.__setattr__(self, "edge_robin", robin)

    @property
    def node_count(self) -> int:
        return int(len(self.nodes))

    @property
    def triangle_count(self) -> int:
        return int(len(self.triangles))

    @cached_property
    def areas(self) -> FloatArray:
        return _signed_areas(self.nodes, self.triangles)

    @property
    def total_area(self) -> float:
        return float(np.sum(self.areas))

    @cached_property
    def centroids(self) -> FloatArray:
        result: FloatArray = self.nodes[self.triangles].mean(axis=1)
        return result

    @cached_property
    def h(self) -> float:
        """
        Largest edge length.
        """
        corners = self.nodes[self.triangles]
        lengths = np.linalg.norm(corners - np.roll(corners, 1, axis=1), axis=-1)
        return float(lengths.max())

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.edge_labels)))

    def edges_with_label(self, label: str) -> IntArray:
        mask = np.array([edge_label == label for edge_label in self.edge_labels], dtype=bool)
        result: IntArray = self.boundary_edges[mask]
        return result

    def unlabeled_boundary_edges(self) -> list[tuple[int, int]]:
        labeled = {_edge_key(edge) for edge in self.boundary_edges}
        return [
            edge
            for edge, count in _edge_counts(self.triangles).items()
            if count == 1 and edge not in labeled
        ]

    def boundary_polyline(self, labels: Optional[set[str]] = None) -> PolylineSet:
        """
        Union of the boundary edges carrying any of ``labels``, all edges if omitted.
        """
        mask = np.array(
            [labels is None or label in labels for label in self.edge_labels], dtype=bool
        )
        edges = self.boundary_edges[mask]
        starts, ends = self.nodes[edges[:, 0]], self.nodes[edges[:, 1]]
        # Both banks of a slit trace the same segments, keep one copy.
        flipped = (starts[:, 0] > ends[:, 0]) | (
            (starts[:, 0] == ends[:, 0]) & (starts[:, 1] > ends[:, 1])
        )
        keys = np.where(flipped[:, None], np.hstack([ends, starts]), np.hstack([starts, ends]))
        _, first = np.unique(np.round(keys, 12), axis=0, return_index=True)
        keep = np.sort(first)
        return PolylineSet(starts=starts[keep], ends=ends[keep])

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "nodes": self.node_count,
            "triangles": self.triangle_count,
            "boundary_edges": int(len(self.boundary_edges)),
            "slit_pairs": int(len(self.slit_pairs)),
            "area": self.total_area,
            "h": self.h,
        }


@dataclass(frozen=True)
class BoundaryPartition:
    """
    Boundary conditions by edge label.

    Labels in ``dirichlet`` form the closed Dirichlet part D.
    The rest is Neumann, with a Robin coefficient where ``robin`` gives one, and ``dynamic``
    selects the part S that carries a dynamic boundary condition.
    """

    dirichlet: frozenset[str] = frozenset()
    robin: Mapping[str, float] = field(default_factory=dict)
    dynamic: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "dirichlet", frozenset(self.dirichlet))
        object.__setattr__(self, "dynamic", frozenset(self.dynamic))
        object.__setattr__(self, "robin", dict(self.robin))

        for label, value in self.robin.items():
            if not value >= 0:
                raise ValueError(
                    f"Robin coefficient must be nonnegative, got {value} on '{label}'"
                )
        if self.dirichlet & set(self.robin):
            raise ValueError(
                f"Robin coefficients given on Dirichlet labels: "
                f"{sorted(self.dirichlet & set(self.robin))}"
            )
        if self.dirichlet & self.dynamic:
            raise ValueError(
                f"Dynamic boundary overlaps the Dirichlet part: "
                f"{sorted(self.dirichlet & self.dynamic)}"
            )

    @property
    def labels(self) -> frozenset[str]:
        return self.dirichlet | set(self.robin) | self.dynamic

    def scaled_robin(self, factor: float) -> BoundaryPartition:
        return BoundaryPartition(
            dirichlet=self.dirichlet,
            robin={label: factor * value for label, value in self.robin.items()},
            dynamic=self.dynamic,
        )


@dataclass(frozen=True, eq=False)
class BoundaryEdges:
    """
    Boundary edges in degree-of-freedom numbering, with lengths and per-edge coefficient.
    """

    dofs: IntArray
    lengths: FloatArray
    coefficients: FloatArray
    nodes: IntArray

    @property
    def count(self) -> int:
        return int(len(self.dofs))


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """
    P1 discretization of the form on one mesh.

    All matrices act on the full degree-of-freedom vector. Dirichlet degrees of freedom are
    eliminated by restricting to ``free_dofs``, see :meth:`free`.
    """

    mesh: Mesh2D
    partition: BoundaryPartition
    flavor: FormDomainFlavor
    coefficient: CoefficientField
    dof_map: IntArray
    dof_count: int
    element_dofs: IntArray
    element_gradients: FloatArray
    element_matrices: FloatArray
    stiffness_symmetric: sparse.csr_matrix
    stiffness_antisymmetric: sparse.csr_matrix
    mass: sparse.csr_matrix
    robin_mass: sparse.csr_matrix
    dynamic_mass: sparse.csr_matrix
    robin_edges: BoundaryEdges
    dynamic_edges: BoundaryEdges
    free_dofs: IntArray
    dirichlet_dofs: IntArray
    eta: float
    theta2: SectorAngle

    @cached_property
    def stiffness(self) -> sparse.csr_matrix:
        """
        ``K = K(s) + K(t)``. Nonsymmetric unless the coefficient is symmetric.
        """
        return (self.stiffness_symmetric + self.stiffness_antisymmetric).tocsr()

    @cached_property
    def form_matrix(self) -> sparse.csr_matrix:
        """
        Stiffness plus Robin boundary mass.
        """
        return (self.stiffness + self.robin_mass).tocsr()

    @cached_property
    def lumped_mass(self) -> FloatArray:
        result: FloatArray = np.asarray(self.mass.sum(axis=1)).reshape(-1)
        return result

    @cached_property
    def lumped_dynamic_mass(self) -> FloatArray:
        result: FloatArray = np.asarray(self.dynamic_mass.sum(axis=1)).reshape(-1)
        return result

    @cached_property
    def dof_coordinates(self) -> FloatArray:
        # The first node mapped to each degree of freedom represents it.
        representatives = np.full(self.dof_count, -1, dtype=np.int64)
        for node in range(len(self.dof_map) - 1, -1, -1):
            representatives[self.dof_map[node]] = node
        result: FloatArray = self.mesh.nodes[representatives]
        return result

    @property
    def free_count(self) -> int:
        return int(len(self.free_dofs))

    def free(self, matrix: sparse.spmatrix) -> sparse.csr_matrix:
        return sparse.csr_matrix(matrix)[self.free_dofs][:, self.free_dofs]

    def extend(self, free_values: npt.ArrayLike) -> npt.NDArray[Any]:
        """
        Full degree-of-freedom vector from free values, zero on the Dirichlet part.
        """
        values = np.asarray(free_values)
        result = np.zeros(self.dof_count, dtype=np.result_type(values, np.float64))
        result[self.free_dofs] = values
        return result

    def node_values(self, dof_values: npt.ArrayLike) -> npt.NDArray[Any]:
        result: npt.NDArray[Any] = np.asarray(dof_values)[self.dof_map]
        return result

    def to_dict(self) -> dict[str, Any]:
        return {
            "mesh": self.mesh.name,
            "flavor": self.flavor.value,
            "coefficient": self.coefficient.name,
            "dofs": self.dof_count,
            "free_dofs": self.free_count,
            "dirichlet_dofs": int(len(self.dirichlet_dofs)),
            "robin_edges": self.robin_edges.count,
            "dynamic_edges": self.dynamic_edges.count,
            "eta": self.eta,
            "theta2": self.theta2.theta,
        }


def element_gradients(nodes: FloatArray, triangles: IntArray) -> FloatArray:
    """
    Constant gradients of the three P1 basis functions on each triangle, shape (m, 3, 2).
    """
    corners = nodes[triangles]
    areas = _signed_areas(nodes, triangles)
    following = np.roll(corners, -1, axis=1)
    preceding = np.roll(corners, -2, axis=1)
    result: FloatArray = np.stack(
        [following[..., 1] - preceding[..., 1], preceding[..., 0] - following[..., 0]], axis=-1
    ) / (2 * areas[:, None, None])
    return result


def local_stiffness(
    gradients: FloatArray, areas: FloatArray, element_matrices: FloatArray
) -> FloatArray:
    """
    ``K_T[i, j] = |T| <a_T grad phi_j, grad phi_i>``, shape (m, 3, 3).
    """
    result: FloatArray = areas[:, None, None] * np.einsum(
        "mik,mkl,mjl->mij", gradients, element_matrices, gradients
    )
    return result


def assemble(
    mesh: Mesh2D,
    coefficient: CoefficientField,
    partition: BoundaryPartition,
    flavor: FormDomainFlavor = FormDomainFlavor.SUPPORT_AWAY,
) -> AssembledSystem:
    """
    Assemble stiffness, mass, Robin mass and dynamic mass.

    Arguments:
        mesh: The triangulation. Every boundary edge must carry a label.
        coefficient: Coefficient field, sampled at element centroids.
        partition: Boundary conditions by label.
        flavor: Form domain. Slit nodes are identified for ``SMOOTH_CLOSURE``.

    Return:
        The system. Dirichlet degrees of freedom are those touching a Dirichlet edge, endpoints
        included.
    """
    unlabeled = mesh.unlabeled_boundary_edges()
    if unlabeled:
        raise ValueError(f"Mesh has {len(unlabeled)} unlabeled boundary edges, e.g. {unlabeled[0]}")
    unknown = partition.labels - set(mesh.labels)
    if unknown:
        raise ValueError(
            f"Boundary labels {sorted(unknown)} do not exist on mesh '{mesh.name}', "
            f"available: {list(mesh.labels)}"
        )

    dof_map, dof_count = _dof_map(mesh, flavor)
    element_dofs: IntArray = dof_map[mesh.triangles]
    areas = mesh.areas
    gradients = element_gradients(mesh.nodes, mesh.triangles)

    matrices = coefficient.matrices(mesh.centroids)
    eta, tan_theta = coefficient_constants(matrices)
    symmetric = 0.5 * (matrices + np.swapaxes(matrices, 1, 2))
    antisymmetric = 0.5 * (matrices - np.swapaxes(matrices, 1, 2))

    def scatter(local: FloatArray) -> sparse.csr_matrix:
        return _scatter(element_dofs, local, dof_count)

    mass = scatter(areas[:, None, None] * _REFERENCE_MASS[None, :, :])

    edge_dofs, edge_nodes, edge_labels, edge_robin = _boundary_edges(mesh, dof_map)
    edge_lengths = np.linalg.norm(
        mesh.nodes[edge_nodes[:, 1]] - mesh.nodes[edge_nodes[:, 0]], axis=1
    )

    def select(mask: npt.NDArray[np.bool_], coefficients: FloatArray) -> BoundaryEdges:
        return BoundaryEdges(
            dofs=edge_dofs[mask],
            lengths=edge_lengths[mask],
            coefficients=coefficients[mask],
            nodes=edge_nodes[mask],
        )

    robin_values = np.array(
        [partition.robin.get(label, value) for label, value in zip(edge_labels, edge_robin)]
    ).reshape(-1)
    in_dirichlet = np.array([label in partition.dirichlet for label in edge_labels], dtype=bool)
    robin_edges = select(~in_dirichlet & (robin_values > 0), robin_values)
    dynamic_edges = select(
        np.array([label in partition.dynamic for label in edge_labels], dtype=bool),
        np.ones(len(edge_labels)),
    )

    dirichlet_dofs = np.unique(edge_dofs[in_dirichlet]).astype(np.int64)
    free_dofs = np.setdiff1d(np.arange(dof_count), dirichlet_dofs).astype(np.int64)

    system = AssembledSystem(
        mesh=mesh,
        partition=partition,
        flavor=flavor,
        coefficient=coefficient,
        dof_map=dof_map,
        dof_count=dof_count,
        element_dofs=element_dofs,
        element_gradients=gradients,
        element_matrices=matrices,
        stiffness_symmetric=scatter(local_stiffness(gradients, areas, symmetric)),
        stiffness_antisymmetric=scatter(local_stiffness(gradients, areas, antisymmetric)),
        mass=mass,
        robin_mass=_edge_mass(robin_edges, dof_count),
        dynamic_mass=_edge_mass(dynamic_edges, dof_count),
        robin_edges=robin_edges,
        dynamic_edges=dynamic_edges,
        free_dofs=free_dofs,
        dirichlet_dofs=dirichlet_dofs,
        eta=eta,
        theta2=SectorAngle.from_tan(tan_theta),
    )
    LOGGER.debug(
        "Assembled '%s' (%s): %d dofs, %d free, %d Robin edges, %d dynamic edges",
        mesh.name,
        flavor.value,
        dof_count,
        system.free_count,
        robin_edges.count,
        dynamic_edges.count,
    )
    return system


def dynamic_block(system: AssembledSystem) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """
    Form matrix and enlarged mass ``M + M_S`` on the free degrees of freedom.
    Without a dynamic boundary part the mass is ``M`` itself.
    """
    return system.free(system.form_matrix), system.free(system.mass + system.dynamic_mass)


def interpolate(
    system: AssembledSystem, function: Callable[[FloatArray], npt.ArrayLike]
) -> npt.NDArray[Any]:
    """
    Nodal interpolant on all degrees of freedom. ``function`` maps points (n, 2) to values (n,).
    """
    return np.asarray(function(system.dof_coordinates))


def quadrature_values(
    system: AssembledSystem, dof_values: npt.ArrayLike
) -> tuple[npt.NDArray[Any], npt.NDArray[Any], FloatArray]:
    """
    Values and gradients of a P1 function at the interior rule points.

    Return:
        Values of shape (m, 3), gradients of shape (m, 3, 2) and quadrature weights of shape
        (m, 3), the weights already multiplied by the element areas.
    """
    local = np.asarray(dof_values)[system.element_dofs]
    values = local @ INTERIOR_RULE_POINTS.T
    gradient = np.einsum("mi,mik->mk", local, system.element_gradients)
    gradients = np.broadcast_to(gradient[:, None, :], (len(local), 3, 2))
    weights = system.mesh.areas[:, None] * INTERIOR_RULE_WEIGHTS[None, :]
    return values, gradients, weights


def quadrature_points(mesh: Mesh2D) -> FloatArray:
    """
    Physical interior rule points, shape (m, 3, 2).
    """
    result: FloatArray = np.einsum("qi,mik->mqk", INTERIOR_RULE_POINTS, mesh.nodes[mesh.triangles])
    return result


def _scatter(element_dofs: IntArray, local: FloatArray, size: int) -> sparse.csr_matrix:
    rows = np.repeat(element_dofs, element_dofs.shape[1], axis=1).reshape(-1)
    columns = np.tile(element_dofs, (1, element_dofs.shape[1])).reshape(-1)
    return sparse.coo_matrix((local.reshape(-1), (rows, columns)), shape=(size, size)).tocsr()


def _edge_mass(edges: BoundaryEdges, size: int) -> sparse.csr_matrix:
    local = (edges.coefficients * edges.lengths)[:, None, None] * _REFERENCE_EDGE_MASS[None, :, :]
    return _scatter(edges.dofs, local, size)


def _dof_map(mesh: Mesh2D, flavor: FormDomainFlavor) -> tuple[IntArray, int]:
    mapping = np.arange(mesh.node_count, dtype=np.int64)
    if flavor is FormDomainFlavor.SMOOTH_CLOSURE and len(mesh.slit_pairs):
        mapping[mesh.slit_pairs[:, 0]] = mesh.slit_pairs[:, 1]
    # Renumber consecutively, keeping the order of first appearance.
    _, first, inverse = np.unique(mapping, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    result: IntArray = order[inverse].astype(np.int64)
    return result, int(len(first))


def _boundary_edges(
    mesh: Mesh2D, dof_map: IntArray
) -> tuple[IntArray, IntArray, list[str], FloatArray]:
    """
    Labeled boundary edges in degree-of-freedom numbering.
    Edges that become interior once slit nodes are identified are dropped.
    """
    edge_dofs = dof_map[mesh.boundary_edges]
    keys = [_edge_key(edge) for edge in edge_dofs]
    seen: dict[tuple[int, int], int] = {}
    for key in keys:
        seen[key] = seen.get(key, 0) + 1
    keep = np.array([seen[key] == 1 for key in keys], dtype=bool).reshape(-1)
    labels = [label for label, kept in zip(mesh.edge_labels, keep) if kept]
    assert mesh.edge_robin is not None
    return (
        edge_dofs[keep].reshape(-1, 2),
        mesh.boundary_edges[keep].reshape(-1, 2),
        labels,
        mesh.edge_robin[keep],
    )


def _signed_areas(nodes: FloatArray, triangles: IntArray) -> FloatArray:
    corners = nodes[triangles]
    first = corners[:, 1] - corners[:, 0]
    second = corners[:, 2] - corners[:, 0]
    result: FloatArray = 0.5 * (first[:, 0] * second[:, 1] - first[:, 1] * second[:, 0])
    return result


def _edge_key(edge: npt.ArrayLike) -> tuple[int, int]:
    first, second = (int(value) for value in np.asarray(edge).reshape(2))
    return (first, second) if first < second else (second, first)


def _edge_counts(triangles: IntArray) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for triangle in triangles:
        for index in range(3):
            key = _edge_key((triangle[index], triangle[(index + 1) % 3]))
            counts[key] = counts.get(key, 0) + 1
    return counts


def _orient(nodes: FloatArray, triangles: IntArray) -> IntArray:
    negative = _signed_areas(nodes, triangles) < 0
    result = triangles.copy()
    result[negative] = result[negative][:, [0, 2, 1]]
    return result


def _labeled_boundary(
    nodes: FloatArray,
    triangles: IntArray,
    labeler: Callable[[FloatArray, FloatArray], str],
) -> tuple[IntArray, tuple[str, ...]]:
    """
    Find the edges that belong to exactly one triangle and label them from their midpoint and the
    centroid of their triangle.
    """
    owners: dict[tuple[int, int], list[int]] = {}
    for number, triangle in enumerate(triangles):
        for index in range(3):
            edge = (int(triangle[index]), int(triangle[(index + 1) % 3]))
            owners.setdefault(_edge_key(edge), []).append(number)

    edges = []
    labels = []
    for key, owning in owners.items():
        if len(owning) != 1:
            continue
        midpoint = nodes[list(key)].mean(axis=0)
        centroid = nodes[triangles[owning[0]]].mean(axis=0)
        edges.append(key)
        labels.append(labeler(midpoint, centroid))

    order = np.lexsort(np.array(edges).T[::-1]) if edges else np.zeros(0, dtype=np.int64)
    edge_array = np.array(edges, dtype=np.int64).reshape(-1, 2)[order]
    return edge_array, tuple(labels[index] for index in order)


def square_mesh(resolution: int) -> Mesh2D:
    """
    Unit square, ``resolution`` cells per side, each cell split along its rising diagonal.
    All triangles are right isosceles.
    """
    n = resolution
    coordinates = np.linspace(0.0, 1.0, n + 1)
    x, y = np.meshgrid(coordinates, coordinates)
    nodes = np.column_stack([x.reshape(-1), y.reshape(-1)])

    def index(i: IntArray, j: IntArray) -> IntArray:
        result: IntArray = j * (n + 1) + i
        return result

    i, j = (grid.reshape(-1) for grid in np.meshgrid(np.arange(n), np.arange(n)))
    lower = np.column_stack([index(i, j), index(i + 1, j), index(i + 1, j + 1)])
    upper = np.column_stack([index(i, j), index(i + 1, j + 1), index(i, j + 1)])
    triangles = np.vstack([lower, upper])

    def labeler(midpoint: FloatArray, _: FloatArray) -> str:
        x_mid, y_mid = midpoint
        if math.isclose(y_mid, 0.0, abs_tol=1e-12):
            return "bottom"
        if math.isclose(x_mid, 1.0, abs_tol=1e-12):
            return "right"
        if math.isclose(y_mid, 1.0, abs_tol=1e-12):
            return "top"
        return "left"

    edges, labels = _labeled_boundary(nodes, triangles, labeler)
    return Mesh2D(
        nodes=nodes, triangles=triangles, boundary_edges=edges, edge_labels=labels, name="square"
    )


def lshape_mesh(resolution: int) -> Mesh2D:
    """
    The unit square without its upper right quarter, ``2 * resolution`` cells per side.
    """
    n = 2 * resolution
    half = resolution
    coordinates = np.linspace(0.0, 1.0, n + 1)
    x, y = np.meshgrid(coordinates, coordinates)
    all_nodes = np.column_stack([x.reshape(-1), y.reshape(-1)])

    cells = [(i, j) for j in range(n) for i in range(n) if not (i >= half and j >= half)]
    triangles_list = []
    for i, j in cells:
        corner = j * (n + 1) + i
        right, up = corner + 1, corner + n + 1
        diagonal = up + 1
        triangles_list.append([corner, right, diagonal])
        triangles_list.append([corner, diagonal, up])
    full_triangles = np.array(triangles_list, dtype=np.int64)

    used = np.unique(full_triangles)
    renumber = np.full(len(all_nodes), -1, dtype=np.int64)
    renumber[used] = np.arange(len(used))
    nodes = all_nodes[used]
    triangles = renumber[full_triangles]

    def labeler(midpoint: FloatArray, _: FloatArray) -> str:
        x_mid, y_mid = midpoint
        if math.isclose(y_mid, 0.0, abs_tol=1e-12):
            return "bottom"
        if math.isclose(x_mid, 0.0, abs_tol=1e-12):
            return "left"
        on_vertical = math.isclose(x_mid, 0.5, abs_tol=1e-12) and y_mid > 0.5
        on_horizontal = math.isclose(y_mid, 0.5, abs_tol=1e-12) and x_mid > 0.5
        if on_vertical or on_horizontal:
            return "reentrant"
        return "outer"

    edges, labels = _labeled_boundary(nodes, triangles, labeler)
    return Mesh2D(
        nodes=nodes, triangles=triangles, boundary_edges=edges, edge_labels=labels, name="lshape"
    )


def slit_disc_mesh(resolution: int) -> Mesh2D:
    """
    Unit disc with the segment [0, 1) x {0} removed.

    Polar grid with ``resolution`` rings and ``4 * resolution`` sectors.
    Slit nodes strictly between the center and the circle are duplicated, the upper side keeps
    the original nodes and the lower side uses the duplicates.
    """
    if resolution < 2:
        raise ValueError(f"Slit disc needs resolution at least 2, got {resolution}")

    rings = resolution
    sectors = 4 * resolution
    angles = 2 * np.pi * np.arange(sectors) / sectors

    nodes_list = [np.zeros((1, 2))]
    for ring in range(1, rings + 1):
        radius = ring / rings
        nodes_list.append(radius * np.column_stack([np.cos(angles), np.sin(angles)]))
    node_count = 1 + rings * sectors

    def ring_node(ring: int, sector: int) -> int:
        return 0 if ring == 0 else 1 + (ring - 1) * sectors + sector % sectors

    duplicates = {}
    for ring in range(1, rings):
        duplicates[ring] = node_count + len(duplicates)
    nodes_list.append(np.column_stack([np.arange(1, rings) / rings, np.zeros(rings - 1)]))
    nodes = np.vstack(nodes_list)

    def closing_node(ring: int, sector: int) -> int:
        # The lower side of the slit uses the duplicated nodes.
        if sector == sectors and 0 < ring < rings:
            return duplicates[ring]
        return ring_node(ring, sector)

    triangles_list = []
    for sector in range(sectors):
        triangles_list.append([0, ring_node(1, sector), closing_node(1, sector + 1)])
        for ring in range(1, rings):
            a = ring_node(ring, sector)
            b = ring_node(ring + 1, sector)
            c = closing_node(ring + 1, sector + 1)
            d = closing_node(ring, sector + 1)
            triangles_list.append([a, b, c])
            triangles_list.append([a, c, d])
    triangles = _orient(nodes, np.array(triangles_list, dtype=np.int64))

    def labeler(midpoint: FloatArray, centroid: FloatArray) -> str:
        if abs(midpoint[1]) < 1e-14 and midpoint[0] > 0 and np.hypot(*midpoint) < 1 - 1e-12:
            return "slit_upper" if centroid[1] > 0 else "slit_lower"
        return "circle"

    edges, labels = _labeled_boundary(nodes, triangles, labeler)
    slit_pairs = np.array(
        [[duplicate, ring_node(ring, 0)] for ring, duplicate in duplicates.items()],
        dtype=np.int64,
    ).reshape(-1, 2)
    return Mesh2D(
        nodes=nodes,
        triangles=triangles,
        boundary_edges=edges,
        edge_labels=labels,
        slit_pairs=slit_pairs,
        name="slit_disc",
    )


CUSP_COLUMNS = 4


def cusp_mesh(resolution: int) -> Mesh2D:
    """
    The cusp ``{0 < y < 1, |x| <= y^3}`` with ``resolution`` rows of ``CUSP_COLUMNS`` cells and a
    single node at the tip.
    """
    rows = resolution
    columns = CUSP_COLUMNS
    nodes_list = [[0.0, 0.0]]
    for row in range(1, rows + 1):
        y = row / rows
        for column in range(columns + 1):
            nodes_list.append([y**3 * (2 * column / columns - 1), y])
    nodes = np.array(nodes_list)

    def node(row: int, column: int) -> int:
        return 0 if row == 0 else 1 + (row - 1) * (columns + 1) + column

    triangles_list = []
    for column in range(columns):
        triangles_list.append([0, node(1, column), node(1, column + 1)])
    for row in range(1, rows):
        for column in range(columns):
            a, b = node(row, column), node(row, column + 1)
            c, d = node(row + 1, column + 1), node(row + 1, column)
            triangles_list.append([a, b, c])
            triangles_list.append([a, c, d])
    triangles = _orient(nodes, np.array(triangles_list, dtype=np.int64))

    def labeler(midpoint: FloatArray, _: FloatArray) -> str:
        return "top" if math.isclose(midpoint[1], 1.0, abs_tol=1e-12) else "side"

    edges, labels = _labeled_boundary(nodes, triangles, labeler)
    return Mesh2D(
        nodes=nodes, triangles=triangles, boundary_edges=edges, edge_labels=labels, name="cusp"
    )


MESH_PRESETS: dict[str, Callable[[int], Mesh2D]] = {
    "square": square_mesh,
    "lshape": lshape_mesh,
    "slit_disc": slit_disc_mesh,
    "cusp": cusp_mesh,
}

_PRESET_LABELS = {
    "square": ("bottom", "right", "top", "left"),
    "lshape": ("bottom", "left", "reentrant", "outer"),
    "slit_disc": ("circle", "slit_upper", "slit_lower"),
    "cusp": ("top", "side"),
}


def preset_labels(name: str) -> tuple[str, ...]:
    if name not in _PRESET_LABELS:
        raise ValueError(f"Unknown domain preset '{name}', available: {sorted(MESH_PRESETS)}")
    return _PRESET_LABELS[name]


def generate_mesh(name: str, resolution: int) -> Mesh2D:
    """
    Build a preset domain: ``square``, ``lshape``, ``slit_disc`` or ``cusp``.
    """
    if name not in MESH_PRESETS:
        raise ValueError(f"Unknown domain preset '{name}', available: {sorted(MESH_PRESETS)}")
    if resolution < 1:
        raise ValueError(f"Mesh resolution must be at least 1, got {resolution}")

    mesh = MESH_PRESETS[name](resolution)
    LOGGER.debug(
        "Generated %s mesh: %d nodes, %d triangles, h = %.4g",
        name,
        mesh.node_count,
        mesh.triangle_count,
        mesh.h,
    )
    return mesh


def write_mesh(mesh: Mesh2D) -> str:
    """
    Serialize in the plain-text mesh format, see :func:`read_mesh`.
    """
    assert mesh.edge_robin is not None
    lines = [f"# {mesh.name}", str(mesh.node_count)]
    lines += [f"{x!r} {y!r}" for x, y in mesh.nodes.tolist()]
    lines.append(str(mesh.triangle_count))
    lines += [" ".join(str(index) for index in triangle) for triangle in mesh.triangles.tolist()]
    lines.append(str(len(mesh.boundary_edges)))
    for (first, second), label, robin in zip(
        mesh.boundary_edges.tolist(), mesh.edge_labels, mesh.edge_robin.tolist()
    ):
        suffix = f" {robin!r}" if robin else ""
        lines.append(f"{first} {second} {label}{suffix}")
    if len(mesh.slit_pairs):
        lines.append(str(len(mesh.slit_pairs)))
        lines += [f"{duplicate} {original}" for duplicate, original in mesh.slit_pairs.tolist()]
    return "\n".join(lines) + "\n"


def read_mesh(text: str, name: str = "mesh") -> Mesh2D:
    """
    Parse the plain-text mesh format.

    Sections in order, each a count line followed by that many lines: nodes "x y", triangles
    "i j k", boundary edges "i j LABEL [b]", and optionally slit pairs "duplicate original".
    Text after "#" is ignored.
    """
    lines = []
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if content:
            lines.append((number, content.split()))
    position = 0

    def section(expected: Optional[int]) -> list[tuple[int, list[str]]]:
        nonlocal position
        number, fields = lines[position]
        if len(fields) != 1 or not fields[0].isdigit():
            raise ValueError(f"Line {number}: expected a count, got '{' '.join(fields)}'")
        count = int(fields[0])
        rows = lines[position + 1 : position + 1 + count]
        if len(rows) != count:
            raise ValueError(f"Line {number}: section announces {count} rows, got {len(rows)}")
        for row_number, row in rows:
            if expected is not None and len(row) != expected:
                raise ValueError(f"Line {row_number}: expected {expected} fields, got {len(row)}")
        position += 1 + count
        return rows

    try:
        nodes = [[float(value) for value in row] for _, row in section(2)]
        triangles = [[int(value) for value in row] for _, row in section(3)]
        edge_rows = section(None)
        edges, labels, robin = [], [], []
        for number, row in edge_rows:
            if len(row) not in (3, 4):
                raise ValueError(f"Line {number}: expected 'i j LABEL [b]'")
            edges.append([int(row[0]), int(row[1])])
            labels.append(row[2])
            robin.append(float(row[3]) if len(row) == 4 else 0.0)
        slit_pairs = (
            [[int(value) for value in row] for _, row in section(2)]
            if position < len(lines)
            else []
        )
    except IndexError as exception:
        raise ValueError("Mesh text ends before all sections were read") from exception

    return Mesh2D(
        nodes=np.array(nodes, dtype=np.float64).reshape(-1, 2),
        triangles=np.array(triangles, dtype=np.int64).reshape(-1, 3),
        boundary_edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        edge_labels=tuple(labels),
        slit_pairs=np.array(slit_pairs, dtype=np.int64).reshape(-1, 2),
        edge_robin=np.array(robin, dtype=np.float64),
        name=name,
    )


def load_mesh(path: Path) -> Mesh2D:
    return read_mesh(path.read_text(encoding="utf-8"), name=path.stem)
