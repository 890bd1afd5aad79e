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
from typing import Any, Optional, Sequence

# Third party libraries
import numpy as np
import numpy.typing as npt
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

# Local folder libraries
from . import DENSE_BUDGET
from .operator_lab import DiscreteOperator

LOGGER = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

CONTRACTION_TOLERANCE = 1e-9
INFORMATIONAL_TOLERANCE = 1e-6
POSITIVITY_TOLERANCE = 1e-10
# Root mean square of the log-log fit residual above which a slope is not trusted.
FIT_RESIDUAL_LIMIT = 0.2
# Relative change between step counts at which Crank-Nicolson is accepted.
CRANK_NICOLSON_TOLERANCE = 1e-6
CRANK_NICOLSON_MAX_STEPS = 4096

ULTRA_PAIRS = ((1.0, math.inf), (1.0, 2.0), (2.0, math.inf))

CONTRACTION_HEADER = ["t", "argument", "p", "norm", "passed", "asserted"]
ULTRA_HEADER = ["source", "target", "t", "norm"]


@dataclass(frozen=True, eq=False)
class SemigroupSnapshot:
    z: complex
    values: ComplexArray
    method: str
    steps: int = 1


def _check_time(z: complex) -> complex:
    z = complex(z)
    if z.real < -1e-14 * abs(z):
        raise ValueError(f"Semigroup time must have nonnegative real part, got {z}")
    return z


def whitened_exponential(operator: DiscreteOperator, z: complex) -> npt.NDArray[Any]:
    """
    ``exp(-z B)``, whose Euclidean norm is the M-norm of ``exp(-z A)``.
    """
    z = _check_time(z)
    if operator.symmetric:
        eigenvalues, eigenvectors = operator.whitened_eigh
        result: npt.NDArray[Any] = (eigenvectors * np.exp(-z * eigenvalues)) @ eigenvectors.T
        return result
    return np.asarray(linalg.expm(-z * operator.whitened))


def propagator(operator: DiscreteOperator, z: complex, lumped: bool = False) -> npt.NDArray[Any]:
    """
    The matrix of ``exp(-z A)`` on the free degrees of freedom.

    Arguments:
        operator: The discrete operator.
        z: Time, real or complex with nonnegative real part.
        lumped: Use the lumped mass ``W`` in place of ``M``, so that ``A = W^-1 K``.

    Return:
        Dense matrix of the propagator. Real for real ``z`` and a real form.
    """
    z = _check_time(z)
    operator.require_dense("Propagator")

    if lumped:
        root = np.sqrt(operator.weights)
        if operator.symmetric:
            eigenvalues, eigenvectors = operator.lumped_eigh
            exponential = (eigenvectors * np.exp(-z * eigenvalues)) @ eigenvectors.T
        else:
            exponential = linalg.expm(-z * operator.lumped_symmetrized)
        result: npt.NDArray[Any] = exponential / root[:, None] * root[None, :]
    else:
        factor = operator.mass_factor
        exponential = whitened_exponential(operator, z) @ factor.T
        result = linalg.solve_triangular(factor, exponential, lower=True, trans="T")

    if z.imag == 0 and np.iscomplexobj(result):
        result = result.real
    return result


def evolve(
    operator: DiscreteOperator, z: complex, initial: npt.ArrayLike, lumped: bool = False
) -> SemigroupSnapshot:
    """
    Apply ``exp(-z A)`` to initial data on the free degrees of freedom.

    Systems within the dense budget use the matrix exponential. Larger ones use Crank-Nicolson
    with step doubling until two step counts agree.
    """
    z = _check_time(z)
    values = np.asarray(initial, dtype=np.complex128)
    if values.shape != (operator.size,):
        raise ValueError(f"Expected {operator.size} initial values, got shape {values.shape}")

    if z == 0:
        return SemigroupSnapshot(z=z, values=values.copy(), method="identity", steps=0)
    if operator.size <= DENSE_BUDGET:
        method = "eigh" if operator.symmetric else "expm"
        evolved = propagator(operator, z, lumped) @ values
        return SemigroupSnapshot(z=z, values=evolved, method=method)
    return crank_nicolson(operator, z, values, lumped)


def crank_nicolson(
    operator: DiscreteOperator,
    z: complex,
    initial: npt.ArrayLike,
    lumped: bool = False,
    tolerance: float = CRANK_NICOLSON_TOLERANCE,
) -> SemigroupSnapshot:
    z = _check_time(z)
    values = np.asarray(initial, dtype=np.complex128)
    mass = sparse.diags(operator.weights) if lumped else operator.mass

    def march(steps: int) -> ComplexArray:
        step = z / steps
        left = (mass + 0.5 * step * operator.form).tocsc().astype(np.complex128)
        right = (mass - 0.5 * step * operator.form).tocsr()
        factorization = sparse_linalg.splu(left)
        current = values
        for _ in range(steps):
            current = factorization.solve(right @ current)
        return current

    steps = 16
    previous = march(steps)
    while True:
        steps *= 2
        current = march(steps)
        change = float(np.linalg.norm(current - previous))
        scale = max(float(np.linalg.norm(current)), 1e-300)
        if change <= tolerance * scale:
            break
        if steps >= CRANK_NICOLSON_MAX_STEPS:
            LOGGER.warning(
                "Crank-Nicolson at z = %s did not settle: relative change %.3g after %d steps",
                z,
                change / scale,
                steps,
            )
            break
        previous = current
    return SemigroupSnapshot(z=z, values=current, method="crank_nicolson", steps=steps)


def operator_norm(
    matrix: npt.NDArray[Any], p: float, weights: Optional[FloatArray] = None
) -> float:
    """
    Induced norm on ``L^p`` with the lumped mass, ``p`` in {1, 2, inf}.
    At ``p = 2`` the matrix must already be expressed in an orthonormal basis.
    """
    absolute = np.abs(matrix)
    if p == 2:
        return float(np.linalg.norm(matrix, 2))
    if p == math.inf:
        return float(np.max(absolute.sum(axis=1), initial=0.0))
    if p == 1:
        if weights is None:
            raise ValueError("The L^1 norm needs the lumped mass")
        return float(np.max((weights @ absolute) / weights, initial=0.0))
    raise ValueError(f"Operator norms are computed for p in {{1, 2, inf}}, got {p}")


@dataclass(frozen=True)
class ContractionRow:
    t: float
    argument: float
    p: float
    norm: float
    asserted: bool

    @property
    def passed(self) -> bool:
        tolerance = CONTRACTION_TOLERANCE if self.asserted else INFORMATIONAL_TOLERANCE
        return self.norm <= 1 + tolerance

    def row(self) -> list[Any]:
        return [self.t, self.argument, self.p, self.norm, self.passed, self.asserted]


def contraction_scan(
    operator: DiscreteOperator,
    p: float,
    times: Sequence[float],
    arguments: Sequence[float] = (0.0,),
    margin: float = 0.01,
) -> list[ContractionRow]:
    """
    Norms of ``exp(-z A)`` for ``z = t exp(i argument)``.

    At ``p = 2`` the M-norm is used and every row is asserted. For ``p`` in {1, inf} the lumped
    semigroup is used, and rows are asserted for real times when ``K`` is a Z-matrix.
    Complex times must stay ``margin`` inside the sector of analyticity.
    """
    if p not in (1, 2, math.inf):
        raise ValueError(f"Contraction is checked for p in {{1, 2, inf}}, got {p}")
    limit = math.pi / 2 - operator.theta2.theta - margin
    for argument in arguments:
        if abs(argument) > limit:
            raise ValueError(
                f"Time argument {argument:.6g} is outside the sector of analyticity, "
                f"|argument| must be at most {limit:.6g}"
            )
    if any(not t >= 0 for t in times):
        raise ValueError("Times must be nonnegative")

    rows = []
    for argument in arguments:
        for t in times:
            z = t * complex(math.cos(argument), math.sin(argument))
            if p == 2:
                norm = operator_norm(whitened_exponential(operator, z), 2)
                asserted = True
            else:
                norm = operator_norm(propagator(operator, z, lumped=True), p, operator.weights)
                asserted = argument == 0 and operator.z_matrix
            rows.append(ContractionRow(t=t, argument=argument, p=p, norm=norm, asserted=asserted))
    LOGGER.debug(
        "Contraction scan p = %g: largest norm %.12g over %d times",
        p,
        max(row.norm for row in rows),
        len(rows),
    )
    return rows


@dataclass(frozen=True)
class PositivityRow:
    t: float
    min_entry: float
    asserted: bool

    @property
    def tolerance(self) -> float:
        return POSITIVITY_TOLERANCE if self.asserted else INFORMATIONAL_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.min_entry >= -self.tolerance


def positivity_check(operator: DiscreteOperator, times: Sequence[float]) -> list[PositivityRow]:
    """
    Smallest entry of the lumped propagator. Asserted nonnegative when ``K`` is a Z-matrix,
    which holds for acute meshes, otherwise reported only.
    """
    asserted = operator.z_matrix
    if not asserted:
        LOGGER.info("Stiffness has positive off-diagonal entries, positivity is informational")
    return [
        PositivityRow(
            t=t, min_entry=float(np.min(propagator(operator, t, lumped=True))), asserted=asserted
        )
        for t in times
    ]


def semigroup_law_error(operator: DiscreteOperator, first: complex, second: complex) -> float:
    """
    Relative Frobenius distance between ``T(z1 + z2)`` and ``T(z1) T(z2)``.
    """
    combined = whitened_exponential(operator, complex(first) + complex(second))
    product = whitened_exponential(operator, first) @ whitened_exponential(operator, second)
    scale = max(float(np.linalg.norm(combined)), 1e-300)
    return float(np.linalg.norm(combined - product)) / scale


def mass_drift(
    operator: DiscreteOperator, initial: npt.ArrayLike, times: Sequence[float]
) -> float:
    """
    Largest relative change of ``sum_i w_i u_i`` under the lumped semigroup. Zero up to rounding
    for pure Neumann conditions.
    """
    values = np.asarray(initial, dtype=np.float64)
    total = float(operator.weights @ values)
    scale = max(abs(total), float(operator.weights @ np.abs(values)), 1e-300)
    drift = 0.0
    for t in times:
        evolved = propagator(operator, t, lumped=True) @ values
        drift = max(drift, abs(float(np.real(operator.weights @ evolved)) - total) / scale)
    return drift


def _ultracontractive_profile(
    matrix: FloatArray, weights: FloatArray, source: float, target: float
) -> FloatArray:
    """
    Per degree of freedom quantity whose maximum is the norm. Runs over source nodes for
    ``p = 1`` and over target nodes otherwise.
    """
    absolute = np.abs(matrix)
    pair = (source, target)
    if pair == (1.0, math.inf):
        return np.max(absolute / weights[None, :], axis=0)
    if pair == (1.0, 2.0):
        return np.sqrt(weights @ absolute**2) / weights
    if pair == (2.0, math.inf):
        return np.sqrt((absolute**2) @ (1 / weights))
    raise ValueError(f"Unsupported exponent pair {pair}, available: {ULTRA_PAIRS}")


def ultracontractive_norm(
    matrix: FloatArray, weights: FloatArray, source: float, target: float
) -> float:
    """
    Norm of a propagator from ``L^source`` to ``L^target`` with the lumped mass.
    """
    profile = _ultracontractive_profile(matrix, weights, source, target)
    return float(np.max(profile))


def local_mesh_size(operator: DiscreteOperator, index: int) -> float:
    """
    Longest edge of the triangles around free degree of freedom ``index``.
    """
    system = operator.system
    touching = np.any(system.element_dofs == system.free_dofs[index], axis=1)
    corners = system.mesh.nodes[system.mesh.triangles[touching]]
    lengths = np.linalg.norm(corners - np.roll(corners, 1, axis=1), axis=-1)
    return float(lengths.max())


@dataclass(frozen=True, eq=False)
class UltraReport:
    """
    Log-log fit of ``||T(t)||_{p -> q}`` against t.

    A bound ``C t^(-gamma (1/p - 1/q))`` with ``gamma = beta / (beta - 2)`` is the semigroup form of
    a Sobolev embedding of order beta, so the fitted slope implies an exponent beta.
    """

    source: float
    target: float
    times: FloatArray
    norms: FloatArray
    slope: float
    intercept: float
    residual: float
    expected_slope: Optional[float] = None
    slope_tolerance: float = 0.15

    @property
    def reliable(self) -> bool:
        return self.residual <= FIT_RESIDUAL_LIMIT

    @property
    def implied_gamma(self) -> float:
        return -self.slope / (1 / self.source - 1 / self.target)

    @property
    def implied_beta(self) -> float:
        gamma = self.implied_gamma
        return 2 * gamma / (gamma - 1) if gamma > 1 else math.inf

    @property
    def within_expected(self) -> Optional[bool]:
        if self.expected_slope is None:
            return None
        return abs(self.slope - self.expected_slope) <= self.slope_tolerance

    def rows(self) -> list[list[float]]:
        return [
            [self.source, self.target, float(t), float(norm)]
            for t, norm in zip(self.times, self.norms)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "source": self.source,
            "target": "inf" if self.target == math.inf else self.target,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "reliable": self.reliable,
            "implied_beta": "inf" if self.implied_beta == math.inf else self.implied_beta,
            "expected_slope": self.expected_slope,
            "within_expected": self.within_expected,
        }


def default_times(operator: DiscreteOperator, count: int = 12) -> FloatArray:
    """
    Log-spaced times from ``max(h^2, 1e-4)`` to 0.1.
    """
    start = max(operator.system.mesh.h**2, 1e-4)
    result: FloatArray = np.geomspace(start, 0.1, count)
    return result


def ultracontractivity_fit(
    operator: DiscreteOperator,
    times: npt.ArrayLike,
    pair: tuple[float, float] = (1.0, math.inf),
    expected_slope: Optional[float] = None,
    slope_tolerance: float = 0.15,
    workers: int = 1,
) -> UltraReport:
    """
    Fit the decay of the lumped semigroup from ``L^p`` to ``L^q``.

    Arguments:
        operator: The discrete operator.
        times: Strictly increasing times in (0, 1].
        pair: The exponents ``(p, q)``, one of ``ULTRA_PAIRS``.
        expected_slope: Slope to compare with, if known.
        slope_tolerance: Allowed deviation from ``expected_slope``.
        workers: Threads used to evaluate the propagators.

    Return:
        The fit. Slopes with a large residual are flagged unreliable.
    """
    grid = np.asarray(times, dtype=np.float64).reshape(-1)
    if len(grid) < 2:
        raise ValueError("Ultracontractivity fit needs at least two times")
    if np.any(grid <= 0) or np.any(grid > 1) or np.any(np.diff(grid) <= 0):
        raise ValueError("Times must be strictly increasing in (0, 1]")
    if pair not in ULTRA_PAIRS:
        raise ValueError(f"Unsupported exponent pair {pair}, available: {ULTRA_PAIRS}")

    weights = operator.weights

    def norm_at(t: float) -> tuple[float, int]:
        profile = _ultracontractive_profile(
            np.real(propagator(operator, t, lumped=True)), weights, pair[0], pair[1]
        )
        peak = int(np.argmax(profile))
        return float(profile[peak]), peak

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        evaluated = list(executor.map(norm_at, grid.tolist()))
    norms = np.array([norm for norm, _ in evaluated])

    # Mesh size around the node where the shortest-time norm peaks.
    local_h = local_mesh_size(operator, evaluated[0][1])
    if grid[0] < local_h**2:
        LOGGER.warning(
            "Smallest time %.3g is below h^2 = %.3g around the peak node, the fit sees the mesh",
            grid[0],
            local_h**2,
        )

    logs = np.log(grid)
    log_norms = np.log(norms)
    slope, intercept = np.polyfit(logs, log_norms, 1)
    residual = float(np.sqrt(np.mean((slope * logs + intercept - log_norms) ** 2)))
    report = UltraReport(
        source=pair[0],
        target=pair[1],
        times=grid,
        norms=norms,
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
        expected_slope=expected_slope,
        slope_tolerance=slope_tolerance,
    )
    if not report.reliable:
        LOGGER.warning(
            "Fit residual %.3g exceeds %.3g, slope is unreliable", residual, FIT_RESIDUAL_LIMIT
        )
    return report

