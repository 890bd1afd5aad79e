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
from functools import cached_property
from typing import Any, Callable, Iterable, Optional, Sequence

# Third party libraries
import numpy as np
import numpy.typing as npt
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

# Local folder libraries
from . import DENSE_BUDGET
from .mesh_fem import (
    EDGE_RULE_POINTS,
    EDGE_RULE_WEIGHTS,
    AssembledSystem,
    BoundaryEdges,
    assemble,
    quadrature_values,
)
from .sector_math import SectorAngle, pairing_density, sector_argument, theta_p

LOGGER = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

# Tolerance on the argument of sampled pairings.
PAIRING_TOLERANCE = 1e-9
# Eigenvalues may leave the sector by this much, relative to the largest eigenvalue.
SPECTRUM_TOLERANCE = 1e-8
# Eigenvalues may cross a support line of the sampled numerical range by this much, relative.
HULL_SLACK = 1e-6
# Relative tolerance on the resolvent bound in the Hilbert case.
RESOLVENT_TOLERANCE = 1e-9
# Eigenvalues computed when the system is too large for a dense solve.
PARTIAL_SPECTRUM_COUNT = 50

RESOLVENT_HEADER = ["z_real", "z_imag", "p", "norm", "bound", "margin", "exact"]
NUMERICAL_RANGE_HEADER = ["p", "real", "imag"]


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """
    The operator ``A = M^-1 K`` of an assembled system, restricted to the free degrees of freedom.

    ``K`` is the stiffness plus Robin boundary mass. With ``dynamic`` set, the boundary mass of
    the dynamic part is added to ``M``, which gives the generator on the product of the domain
    and the dynamic boundary part.
    """

    system: AssembledSystem
    dynamic: bool = False

    @property
    def size(self) -> int:
        return self.system.free_count

    @property
    def theta2(self) -> SectorAngle:
        return self.system.theta2

    def theta(self, p: float) -> SectorAngle:
        return theta_p(self.theta2, p)

    @cached_property
    def form(self) -> sparse.csr_matrix:
        return self.system.free(self.system.form_matrix)

    @cached_property
    def mass(self) -> sparse.csr_matrix:
        mass = self.system.mass
        if self.dynamic:
            mass = mass + self.system.dynamic_mass
        return self.system.free(mass)

    @cached_property
    def weights(self) -> FloatArray:
        """
        Lumped mass on the free degrees of freedom.
        """
        lumped = self.system.lumped_mass
        if self.dynamic:
            lumped = lumped + self.system.lumped_dynamic_mass
        result: FloatArray = lumped[self.system.free_dofs]
        return result

    @cached_property
    def coordinates(self) -> FloatArray:
        result: FloatArray = self.system.dof_coordinates[self.system.free_dofs]
        return result

    @cached_property
    def symmetric(self) -> bool:
        antisymmetric = self.system.free(self.system.stiffness_antisymmetric)
        return bool(np.max(np.abs(antisymmetric.data), initial=0.0) == 0.0)

    @cached_property
    def z_matrix(self) -> bool:
        """
        True if all off-diagonal entries of ``K`` are nonpositive, which makes the lumped
        semigroup positive.
        """
        diagonal = self.form.diagonal()
        off_diagonal = (self.form - sparse.diags(diagonal)).tocsr()
        scale = float(np.max(np.abs(diagonal), initial=1.0))
        return bool(np.max(off_diagonal.data, initial=0.0) <= 1e-12 * scale)

    def require_dense(self, what: str) -> None:
        if self.size > DENSE_BUDGET:
            raise ValueError(
                f"{what} needs dense matrices, but {self.size} free degrees of freedom exceed "
                f"the budget of {DENSE_BUDGET}"
            )

    @cached_property
    def dense_form(self) -> FloatArray:
        self.require_dense("Dense form")
        result: FloatArray = self.form.toarray()
        return result

    @cached_property
    def dense_mass(self) -> FloatArray:
        self.require_dense("Dense mass")
        result: FloatArray = self.mass.toarray()
        return result

    @cached_property
    def mass_factor(self) -> FloatArray:
        """
        Lower Cholesky factor ``L`` with ``M = L L^T``.
        """
        try:
            result: FloatArray = linalg.cholesky(self.dense_mass, lower=True)
        except linalg.LinAlgError as exception:
            raise RuntimeError("Mass matrix is not positive definite") from exception
        return result

    @cached_property
    def whitened(self) -> FloatArray:
        """
        ``B = L^-1 K L^-T``. Similar to ``A``, and the M-norm of functions of ``A`` is the
        Euclidean norm of the same functions of ``B``.
        """
        factor = self.mass_factor
        left = linalg.solve_triangular(factor, self.dense_form, lower=True)
        result: FloatArray = linalg.solve_triangular(factor, left.T, lower=True).T
        return result

    @cached_property
    def whitened_eigh(self) -> tuple[FloatArray, FloatArray]:
        """
        Eigenvalues and orthonormal eigenvectors of ``B``, only for a symmetric form.
        """
        if not self.symmetric:
            raise ValueError("Eigendecomposition shortcut needs a symmetric form")
        whitened = self.whitened
        eigenvalues, eigenvectors = linalg.eigh(0.5 * (whitened + whitened.T))
        return eigenvalues, eigenvectors

    @cached_property
    def lumped_symmetrized(self) -> FloatArray:
        """
        ``W^-1/2 K W^-1/2`` for the lumped mass ``W``, similar to the lumped generator.
        """
        self.require_dense("Lumped generator")
        scale = 1 / np.sqrt(self.weights)
        result: FloatArray = scale[:, None] * self.form.toarray() * scale[None, :]
        return result

    @cached_property
    def lumped_eigh(self) -> tuple[FloatArray, FloatArray]:
        if not self.symmetric:
            raise ValueError("Eigendecomposition shortcut needs a symmetric form")
        symmetrized = self.lumped_symmetrized
        eigenvalues, eigenvectors = linalg.eigh(0.5 * (symmetrized + symmetrized.T))
        return eigenvalues, eigenvectors

    def to_dict(self) -> dict[str, Any]:
        return {
            "size": self.size,
            "dynamic": self.dynamic,
            "symmetric": self.symmetric,
            "z_matrix": self.z_matrix,
            "theta2": self.theta2.theta,
        }


def pairing_parts(operator: DiscreteOperator, u: npt.ArrayLike, p: float) -> tuple[complex, float]:
    """
    Interior and Robin parts of ``a[u, |u|^(p-2) u]`` for a P1 function.

    Arguments:
        operator: The discrete operator.
        u: Values on the free degrees of freedom, zero on the Dirichlet part.
        p: Exponent, at least 2.

    Return:
        The interior integral, by the interior rule, and ``int b |u|^p`` over the Robin edges,
        by the three point Gauss rule.
    """
    system = operator.system
    values = np.asarray(u, dtype=np.complex128)
    if values.shape != (operator.size,):
        raise ValueError(f"Expected {operator.size} free values, got shape {values.shape}")

    full = system.extend(values)
    point_values, gradients, weights = quadrature_values(system, full)
    matrices = np.broadcast_to(
        system.element_matrices[:, None], point_values.shape + system.element_matrices.shape[1:]
    )
    interior = complex(np.sum(weights * pairing_density(point_values, gradients, matrices, p)))
    return interior, boundary_power(system.robin_edges, full, p)


def pairing(operator: DiscreteOperator, u: npt.ArrayLike, p: float) -> complex:
    """
    ``a[u, |u|^(p-2) u]``. At ``p = 2`` this is ``u^H K u``.
    """
    interior, robin = pairing_parts(operator, u, p)
    return interior + robin


def boundary_power(edges: BoundaryEdges, full: npt.ArrayLike, p: float) -> float:
    """
    ``sum over edges of b * int |u|^p`` for a P1 function given on all degrees of freedom.
    """
    if edges.count == 0:
        return 0.0
    ends = np.asarray(full)[edges.dofs]
    values = (
        ends[:, :1] * (1 - EDGE_RULE_POINTS)[None, :] + ends[:, 1:] * EDGE_RULE_POINTS[None, :]
    )
    integrals = np.abs(values) ** p @ EDGE_RULE_WEIGHTS
    return float(np.sum(edges.coefficients * edges.lengths * integrals))


def sample_vectors(
    operator: DiscreteOperator, count: int, rng: np.random.Generator
) -> ComplexArray:
    """
    Random complex test vectors of shape (count, size).

    Rows cycle through three families: independent Gaussian entries, modulated plane waves and
    sparse vectors with about a tenth of the entries set.
    """
    if count < 1:
        raise ValueError(f"Sample count must be positive, got {count}")
    size = operator.size
    if size == 0:
        raise ValueError("Operator has no free degrees of freedom")

    samples = np.empty((count, size), dtype=np.complex128)
    for row in range(count):
        family = row % 3
        if family == 0:
            samples[row] = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        elif family == 1:
            frequency = rng.uniform(-2 * np.pi, 2 * np.pi, size=2)
            envelope = 1 + 0.5 * np.cos(operator.coordinates @ rng.uniform(-3, 3, size=2))
            samples[row] = envelope * np.exp(1j * (operator.coordinates @ frequency))
        else:
            mask = rng.random(size) < 0.1
            mask[rng.integers(size)] = True
            samples[row] = mask * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
    return samples


@dataclass(frozen=True, eq=False)
class NumericalRangeSample:
    """
    Sampled points of the numerical range, normalized by ``||u||_p^p``.
    """

    p: float
    values: ComplexArray
    theta: SectorAngle
    tolerance: float = PAIRING_TOLERANCE

    @property
    def max_argument(self) -> float:
        return float(np.max(sector_argument(self.values), initial=0.0))

    @property
    def margin(self) -> float:
        return self.theta.theta - self.max_argument

    @property
    def min_real(self) -> float:
        return float(np.min(self.values.real, initial=math.inf))

    @property
    def contained(self) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.values), initial=0.0)))
        return self.margin >= -self.tolerance and self.min_real >= -self.tolerance * scale

    def rows(self) -> list[list[float]]:
        return [[self.p, float(value.real), float(value.imag)] for value in self.values]

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "samples": int(len(self.values)),
            "theta": self.theta.theta,
            "max_argument": self.max_argument,
            "margin": self.margin,
            "min_real": self.min_real,
            "contained": self.contained,
        }


def numerical_range_p2(
    operator: DiscreteOperator, samples: int, rng: np.random.Generator
) -> NumericalRangeSample:
    """
    Rayleigh quotients ``u^H K u / u^H M u`` over random complex vectors.
    """
    vectors = sample_vectors(operator, samples, rng)
    numerators = np.sum(np.conj(vectors) * (operator.form @ vectors.T).T, axis=1)
    denominators = np.sum(np.conj(vectors) * (operator.mass @ vectors.T).T, axis=1).real
    values: ComplexArray = numerators / denominators
    return NumericalRangeSample(p=2.0, values=values, theta=operator.theta2)


def numerical_range_p(
    operator: DiscreteOperator, p: float, samples: int, rng: np.random.Generator
) -> NumericalRangeSample:
    """
    Pairings ``a[u, |u|^(p-2) u] / ||u||_p^p`` over random complex vectors, with the norm taken
    in the lumped mass.
    """
    if p < 2:
        raise ValueError(f"Pairing samples need p >= 2, got {p}")
    vectors = sample_vectors(operator, samples, rng)
    norms = np.abs(vectors) ** p @ operator.weights
    values = np.array(
        [pairing(operator, vector, p) / norm for vector, norm in zip(vectors, norms)],
        dtype=np.complex128,
    )
    return NumericalRangeSample(p=p, values=values, theta=operator.theta(p))


@dataclass(frozen=True, eq=False)
class FieldOfValuesBoundary:
    """
    Support function ``h(phi) = max Re(exp(i phi) w)`` of the numerical range of ``B`` with the
    boundary points where it is attained.
    """

    angles: FloatArray
    support: FloatArray
    points: ComplexArray

    def violation(self, values: npt.ArrayLike) -> float:
        """
        Largest amount by which any value crosses a support line, zero if none does.
        """
        values = np.asarray(values, dtype=np.complex128).reshape(-1)
        if not values.size:
            return 0.0
        projections = np.real(np.exp(1j * self.angles)[:, None] * values[None, :])
        return float(max(0.0, np.max(projections - self.support[:, None])))

    def rows(self) -> list[list[float]]:
        return [[2.0, float(point.real), float(point.imag)] for point in self.points]


def field_of_values_boundary(operator: DiscreteOperator, count: int = 64) -> FieldOfValuesBoundary:
    whitened = operator.whitened
    symmetric_part = 0.5 * (whitened + whitened.T)
    antisymmetric_part = 0.5 * (whitened - whitened.T)
    last = operator.size - 1

    angles = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
    support = np.empty(count)
    points = np.empty(count, dtype=np.complex128)
    for index, angle in enumerate(angles):
        hermitian = math.cos(angle) * symmetric_part + 1j * math.sin(angle) * antisymmetric_part
        eigenvalue, eigenvector = linalg.eigh(hermitian, subset_by_index=[last, last])
        vector = eigenvector[:, 0]
        support[index] = eigenvalue[0]
        points[index] = np.vdot(vector, whitened @ vector)
    return FieldOfValuesBoundary(angles=angles, support=support, points=points)


def sector_distance(z: complex, theta: SectorAngle) -> float:
    """
    Distance from ``z`` to the closed sector of half angle ``theta``.
    """
    modulus = abs(z)
    if modulus == 0:
        return 0.0
    argument = abs(math.atan2(z.imag, z.real))
    if argument <= theta.theta:
        return 0.0
    if argument >= theta.theta + math.pi / 2:
        return modulus
    return modulus * math.sin(argument - theta.theta)


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """
    Eigenvalues of the generalized problem ``K v = lambda M v``.

    The spectrum of the generators does not depend on p, so one computation serves every
    sector check.
    """

    eigenvalues: ComplexArray
    partial: bool
    theta: SectorAngle
    tolerance: float = SPECTRUM_TOLERANCE

    @property
    def scale(self) -> float:
        return max(float(np.max(np.abs(self.eigenvalues), initial=0.0)), 1e-300)

    @property
    def max_distance(self) -> float:
        return max(
            (sector_distance(complex(value), self.theta) for value in self.eigenvalues),
            default=0.0,
        )

    @property
    def contained(self) -> bool:
        return self.max_distance <= self.tolerance * self.scale

    @property
    def imaginary_axis_count(self) -> int:
        threshold = self.tolerance * self.scale
        on_axis = (np.abs(self.eigenvalues.real) <= threshold) & (
            np.abs(self.eigenvalues.imag) > threshold
        )
        return int(np.count_nonzero(on_axis))

    def within(self, theta: SectorAngle) -> bool:
        return SpectrumReport(self.eigenvalues, self.partial, theta, self.tolerance).contained

    def to_dict(self) -> dict[str, Any]:
        return {
            "count": int(len(self.eigenvalues)),
            "partial": self.partial,
            "theta": self.theta.theta,
            "max_distance": self.max_distance,
            "min_real": float(np.min(self.eigenvalues.real, initial=math.inf)),
            "max_modulus": float(np.max(np.abs(self.eigenvalues), initial=0.0)),
            "imaginary_axis_count": self.imaginary_axis_count,
            "contained": self.contained,
        }


def spectrum(operator: DiscreteOperator) -> SpectrumReport:
    """
    All eigenvalues when the system fits the dense budget, otherwise the ones closest to the
    origin from a shift-invert Arnoldi iteration.
    """
    if operator.size <= DENSE_BUDGET:
        eigenvalues = linalg.eigvals(operator.dense_form, operator.dense_mass)
        return SpectrumReport(
            eigenvalues=np.asarray(eigenvalues, dtype=np.complex128),
            partial=False,
            theta=operator.theta2,
        )

    count = min(PARTIAL_SPECTRUM_COUNT, operator.size - 2)
    LOGGER.warning(
        "%d free degrees of freedom exceed the dense budget, computing %d eigenvalues only",
        operator.size,
        count,
    )
    eigenvalues = sparse_linalg.eigs(
        operator.form.tocsc(),
        k=count,
        M=operator.mass.tocsc(),
        sigma=-1.0,
        which="LM",
        return_eigenvectors=False,
    )
    return SpectrumReport(
        eigenvalues=np.asarray(eigenvalues, dtype=np.complex128),
        partial=True,
        theta=operator.theta2,
    )


def spectrum_in_numerical_range(
    report: SpectrumReport, boundary: FieldOfValuesBoundary, slack: float = HULL_SLACK
) -> bool:
    scale = max(1.0, float(np.max(np.abs(boundary.support), initial=0.0)))
    return boundary.violation(report.eigenvalues) <= slack * scale


@dataclass(frozen=True)
class ResolventProbe:
    """
    Norm of ``(z - A)^-1`` against the bound ``1 / dist(z, sector)``.

    ``exact`` is set for the Hilbert case. Other exponents are estimated from below by a power
    iteration, so a probe with ``exact`` unset is informational.
    """

    z: complex
    p: float
    norm: float
    bound: float
    exact: bool
    tolerance: float = RESOLVENT_TOLERANCE

    @property
    def margin(self) -> float:
        return self.bound - self.norm

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance * self.bound

    def row(self) -> list[Any]:
        return [self.z.real, self.z.imag, self.p, self.norm, self.bound, self.margin, self.exact]

    def to_dict(self) -> dict[str, Any]:
        return dict(zip(RESOLVENT_HEADER, self.row()))


def resolvent_norm(
    operator: DiscreteOperator,
    z: complex,
    p: float = 2.0,
    rng: Optional[np.random.Generator] = None,
) -> ResolventProbe:
    """
    Resolvent norm at ``z`` outside the closed sector of half angle theta_p.

    At ``p = 2`` the norm is exact in the M inner product, ``1 / sigma_min(z - B)``.
    Other exponents use the lumped mass and a dual power iteration on the weighted resolvent.
    """
    z = complex(z)
    theta = operator.theta(p)
    distance = sector_distance(z, theta)
    if distance <= 0:
        raise ValueError(f"z = {z} lies in the closed sector of half angle {theta.theta:.6g}")
    bound = 1 / distance

    if p == 2:
        shifted = z * np.eye(operator.size) - operator.whitened
        smallest = float(linalg.svdvals(shifted)[-1])
        norm = math.inf if smallest <= 0 else 1 / smallest
        return ResolventProbe(z=z, p=p, norm=norm, bound=bound, exact=True)

    norm = _weighted_resolvent_estimate(
        operator, z, p, np.random.default_rng(0) if rng is None else rng
    )
    return ResolventProbe(z=z, p=p, norm=norm, bound=bound, exact=False)


def resolvent_probes(
    operator: DiscreteOperator,
    points: Sequence[complex],
    p: float,
    seed: int = 0,
    workers: int = 1,
) -> list[ResolventProbe]:
    """
    Probe several points concurrently. Results keep the order of ``points``.
    """

    def probe(index: int) -> ResolventProbe:
        return resolvent_norm(operator, points[index], p, np.random.default_rng([seed, index]))

    if p == 2:
        # Build the shared factorization before the workers need it.
        _ = operator.whitened
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        return list(executor.map(probe, range(len(points))))


def resolvent_rays(theta: SectorAngle, radii: Iterable[float]) -> list[complex]:
    """
    Probe points on the negative real axis, just outside the sector and beyond the imaginary
    axis, both half planes.
    """
    angles = [math.pi]
    for angle in [theta.theta + 0.1, math.pi / 2 + 0.2]:
        angles += [angle, -angle]
    return [
        radius * complex(math.cos(angle), math.sin(angle)) for angle in angles for radius in radii
    ]


def _weighted_resolvent_estimate(
    operator: DiscreteOperator, z: complex, p: float, rng: np.random.Generator
) -> float:
    weights = operator.weights
    shifted = (z * sparse.diags(weights) - operator.form).tocsc().astype(np.complex128)
    try:
        factorization = sparse_linalg.splu(shifted)
    except RuntimeError:
        LOGGER.warning("Resolvent is singular at z = %s", z)
        return math.inf

    inner = weights ** (1 / p)
    outer = weights ** (1 - 1 / p)

    def apply(vector: ComplexArray) -> ComplexArray:
        result: ComplexArray = inner * factorization.solve(outer * vector)
        return result

    def apply_adjoint(vector: ComplexArray) -> ComplexArray:
        result: ComplexArray = outer * factorization.solve(inner * vector, trans="H")
        return result

    return _p_norm_estimate(apply, apply_adjoint, operator.size, p, rng)


def _dual(vector: ComplexArray, p: float) -> ComplexArray:
    """
    The unit vector in the dual norm that attains ``<vector, dual> = ||vector||_p``.
    """
    modulus = np.abs(vector)
    norm = float(np.linalg.norm(vector, ord=p))
    phase = np.where(modulus > 0, vector / np.where(modulus > 0, modulus, 1.0), 0.0)
    result: ComplexArray = phase * (modulus / norm) ** (p - 1)
    return result


def _p_norm_estimate(
    apply: Callable[[ComplexArray], ComplexArray],
    apply_adjoint: Callable[[ComplexArray], ComplexArray],
    size: int,
    p: float,
    rng: np.random.Generator,
    starts: int = 3,
    iterations: int = 50,
) -> float:
    """
    Lower estimate of an induced p-norm by the dual power iteration.
    """
    dual_exponent = p / (p - 1)
    best = 0.0
    for start in range(starts):
        if start == 0:
            vector = np.ones(size, dtype=np.complex128)
        else:
            vector = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        vector = vector / np.linalg.norm(vector, ord=p)

        estimate = 0.0
        for _ in range(iterations):
            image = apply(vector)
            value = float(np.linalg.norm(image, ord=p))
            if value == 0 or value <= estimate * (1 + 1e-12):
                estimate = max(estimate, value)
                break
            estimate = value
            gradient = apply_adjoint(_dual(image, p))
            if np.linalg.norm(gradient, ord=dual_exponent) <= np.vdot(gradient, vector).real:
                break
            vector = _dual(gradient, dual_exponent)
        best = max(best, estimate)
    return best


@dataclass(frozen=True, eq=False)
class RobinMonotonicity:
    """
    Real parts of the pairing for Robin coefficient ``b`` and ``factor * b`` on the same vectors.
    """

    p: float
    factor: float
    base: FloatArray
    scaled: FloatArray

    @property
    def passed(self) -> bool:
        slack = PAIRING_TOLERANCE * np.maximum(1.0, np.abs(self.base))
        return bool(np.all(self.scaled >= self.base - slack))

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "factor": self.factor,
            "samples": int(len(self.base)),
            "min_increase": float(np.min(self.scaled - self.base, initial=math.inf)),
            "passed": self.passed,
        }


def robin_monotonicity(
    system: AssembledSystem,
    vectors: npt.ArrayLike,
    p: float,
    factor: float = 2.0,
) -> RobinMonotonicity:
    """
    Reassemble with all Robin coefficients scaled by ``factor`` and compare real parts of the
    pairing. Increasing ``b`` never decreases them.
    """
    if not factor >= 1:
        raise ValueError(f"Robin scaling factor must be at least 1, got {factor}")
    scaled_system = assemble(
        system.mesh, system.coefficient, system.partition.scaled_robin(factor), system.flavor
    )
    base_operator = DiscreteOperator(system)
    scaled_operator = DiscreteOperator(scaled_system)
    samples = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
    base = np.array([pairing(base_operator, vector, p).real for vector in samples])
    scaled = np.array([pairing(scaled_operator, vector, p).real for vector in samples])
    return RobinMonotonicity(p=p, factor=factor, base=base, scaled=scaled)
