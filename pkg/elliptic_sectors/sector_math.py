# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

"""
Pointwise algebra of real, uniformly elliptic coefficient matrices.

A real matrix ``a`` with positive definite symmetric part ``s`` maps every complex vector into a
closed sector ``|arg <a xi, xi>| <= theta_2``.
With ``t`` the antisymmetric part, ``tan(theta_2)`` is the spectral norm of
``s^(-1/2) t s^(-1/2)``.
The L^p pairing ``<a grad u, grad(|u|^(p-2) u)>`` then lies in the sector of half angle
``theta_p`` given by :func:`theta_p`, and this holds point by point, which is what the rest of the
package builds on.
"""

# Future libraries
from __future__ import annotations

# Standard libraries
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

# Third party libraries
import numpy as np
import numpy.typing as npt

LOGGER = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

# Below this modulus a value of u is treated as zero in the pairing integrand.
ZERO_VALUE_THRESHOLD = 1e-300

MAX_DIMENSION = 3


@dataclass(frozen=True)
class SectorAngle:
    """
    Half angle of a closed sector around the positive real axis, with its tangent cached.

    Use :meth:`from_angle` or :meth:`from_tan` rather than the constructor.
    """

    theta: float
    tan_theta: float

    def __post_init__(self) -> None:
        if not 0 <= self.theta < math.pi / 2:
            raise ValueError(f"Sector angle must be in [0, pi/2), got {self.theta}")

    @classmethod
    def from_angle(cls, theta: float) -> SectorAngle:
        return cls(theta=float(theta), tan_theta=math.tan(theta))

    @classmethod
    def from_tan(cls, tan_theta: float) -> SectorAngle:
        if not 0 <= tan_theta < math.inf:
            raise ValueError(f"Sector tangent must be finite and nonnegative, got {tan_theta}")
        return cls(theta=math.atan(tan_theta), tan_theta=float(tan_theta))

    def contains(self, value: complex, tolerance: float = 0.0) -> bool:
        """
        True if ``value`` is in the closed sector, with ``tolerance`` on the argument.
        Zero is always contained.
        """
        return bool(sector_argument(np.asarray(value)) <= self.theta + tolerance)


@dataclass(frozen=True)
class CoefficientMatrix:
    """
    A real d x d coefficient matrix with positive definite symmetric part.
    ``eta`` is the smallest eigenvalue of the symmetric part.
    """

    entries: FloatArray
    eta: float = field(init=False)

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries)
        if np.iscomplexobj(entries):
            raise ValueError("Coefficient matrices must be real")

        entries = entries.astype(np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"Coefficient matrix must be square, got shape {entries.shape}")
        if not 1 <= entries.shape[0] <= MAX_DIMENSION:
            raise ValueError(f"Coefficient matrix dimension must be at most {MAX_DIMENSION}")

        eta = float(np.linalg.eigvalsh(0.5 * (entries + entries.T))[0])
        if not eta > 0:
            raise ValueError(
                f"Coefficient matrix is not uniformly elliptic: symmetric part has smallest "
                f"eigenvalue {eta}"
            )

        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "eta", eta)

    @property
    def dimension(self) -> int:
        return int(self.entries.shape[0])


def split(a: CoefficientMatrix) -> tuple[FloatArray, FloatArray]:
    """
    Split into symmetric part ``s`` and antisymmetric part ``t`` with ``s + t = a``.
    """
    entries = a.entries
    return 0.5 * (entries + entries.T), 0.5 * (entries - entries.T)


def _split_stack(entries: FloatArray) -> tuple[FloatArray, FloatArray]:
    transposed = np.swapaxes(entries, -1, -2)
    return 0.5 * (entries + transposed), 0.5 * (entries - transposed)


def sector_tangents(entries: FloatArray) -> FloatArray:
    """
    Vectorized ``tan(theta_2)`` for a stack of matrices with shape (..., d, d).
    Raises if any symmetric part is not positive definite.
    """
    s, t = _split_stack(np.asarray(entries, dtype=np.float64))
    eigenvalues, eigenvectors = np.linalg.eigh(s)
    smallest = float(np.min(eigenvalues))
    if not smallest > 0:
        raise ValueError(
            f"Coefficient is not uniformly elliptic: symmetric part has eigenvalue {smallest}"
        )

    # s^(-1/2) from the symmetric eigen-decomposition.
    inverse_root = np.einsum(
        "...ik,...k,...jk->...ij", eigenvectors, 1 / np.sqrt(eigenvalues), eigenvectors
    )
    scaled = inverse_root @ t @ inverse_root
    singular_values = np.linalg.svd(scaled, compute_uv=False)
    result: FloatArray = singular_values[..., 0]
    return result


def sector_angle(a: CoefficientMatrix) -> SectorAngle:
    """
    Smallest sector containing ``<a xi, xi>`` for all complex ``xi``.
    """
    return SectorAngle.from_tan(float(sector_tangents(a.entries)))


def theta_p(theta2: SectorAngle, p: float) -> SectorAngle:
    """
    Sector half angle for the L^p realization.

    For ``p >= 2``, ``tan(theta_p) = sqrt((p-2)^2 + p^2 tan^2(theta_2)) / (2 sqrt(p-1))``.
    For ``1 < p < 2`` the angle of the dual exponent is used.
    """
    if not p > 1:
        raise ValueError(f"Exponent p must be greater than 1, got {p}")
    if p == 2:
        return theta2
    if p < 2:
        p = p / (p - 1)

    tan_theta = math.sqrt((p - 2) ** 2 + p**2 * theta2.tan_theta**2) / (2 * math.sqrt(p - 1))
    return SectorAngle.from_tan(tan_theta)


def sector_argument(values: npt.ArrayLike) -> FloatArray:
    """
    Absolute argument of complex values, with zero mapped to zero.
    """
    values = np.asarray(values)
    result: FloatArray = np.where(values == 0, 0.0, np.abs(np.angle(values)))
    return result


def pairing_density(
    u_values: ComplexArray, gradients: ComplexArray, entries: FloatArray, p: float
) -> ComplexArray:
    """
    Vectorized pairing integrand ``<a grad u, grad(|u|^(p-2) u)>``.

    Arguments:
        u_values: Values of u, shape (...,).
        gradients: Gradients of u, shape (..., d).
        entries: Coefficient matrices broadcastable to shape (..., d, d).
        p: Exponent, at least 2.

    Return:
        Integrand values, shape (...,).
    """
    if p < 2:
        raise ValueError(f"Pairing is defined for p >= 2, got {p}")

    u_values = np.asarray(u_values, dtype=np.complex128)
    gradients = np.asarray(gradients, dtype=np.complex128)
    entries = np.asarray(entries, dtype=np.float64)

    if p == 2:
        # The plain quadratic form, which is also the value where u vanishes.
        flux = np.einsum("...kl,...l->...k", entries, gradients)
        result: ComplexArray = np.einsum("...k,...k->...", flux, np.conj(gradients))
        return result

    modulus = np.abs(u_values)
    vanishing = modulus < ZERO_VALUE_THRESHOLD
    safe_modulus = np.where(vanishing, 1.0, modulus)

    # w = (conj(u)/|u|) grad u, with grad|u| = Re(w).
    direction = np.conj(u_values) / safe_modulus
    w = direction[..., None] * gradients
    scale = safe_modulus ** ((p - 2) / 2)
    phi = (scale * p / 2)[..., None] * w.real
    psi = scale[..., None] * w.imag

    s, t = _split_stack(entries)
    p_dual = p / (p - 1)

    def form(matrix: FloatArray, left: FloatArray, right: FloatArray) -> FloatArray:
        value: FloatArray = np.einsum("...k,...kl,...l->...", left, matrix, right)
        return value

    real_part = 4 / (p * p_dual) * form(s, phi, phi) + form(s, psi, psi)
    imaginary_part = 2 * ((1 - 2 / p) * form(s, phi, psi) + form(t, phi, psi))

    result = np.where(vanishing, 0.0, real_part + 1j * imaginary_part)
    return result


def pairing_integrand(
    u: complex, grad_u: npt.ArrayLike, a: CoefficientMatrix, p: float
) -> complex:
    """
    Pairing integrand at a single point, through the split ``v = |u|^((p-2)/2) u`` with
    ``phi = Re((conj(v)/|v|) grad v)`` and ``psi = Im((conj(v)/|v|) grad v)``.
    Defined as zero where ``u`` vanishes and ``p > 2``.
    """
    return complex(pairing_density(np.asarray(u), np.asarray(grad_u), a.entries, p))


def gradient_split(u: complex, grad_u: npt.ArrayLike, p: float) -> tuple[FloatArray, FloatArray]:
    """
    The pair ``(phi, psi)`` for ``v = |u|^((p-2)/2) u``. Both vanish where u vanishes.
    """
    gradient = np.asarray(grad_u, dtype=np.complex128)
    modulus = abs(u)
    if modulus < ZERO_VALUE_THRESHOLD:
        zero = np.zeros(gradient.shape)
        return zero, zero.copy()

    w = np.conj(u) / modulus * gradient
    scale = modulus ** ((p - 2) / 2)
    return scale * p / 2 * w.real, scale * w.imag


@dataclass(frozen=True)
class CoefficientField:
    """
    Spatially varying coefficient.

    ``evaluator`` maps points of shape (n, 2) to matrices of shape (n, d, d).
    ``eta`` and ``theta2`` are the minimum ellipticity and maximum sector angle over the sample
    points the field was declared with.
    """

    evaluator: Callable[[FloatArray], FloatArray]
    eta: float
    theta2: SectorAngle
    name: str = "field"

    @classmethod
    def from_samples(
        cls,
        evaluator: Callable[[FloatArray], FloatArray],
        sample_points: npt.ArrayLike,
        name: str = "field",
    ) -> CoefficientField:
        matrices = evaluator(np.atleast_2d(np.asarray(sample_points, dtype=np.float64)))
        eta, tan_theta = coefficient_constants(matrices)
        return cls(
            evaluator=evaluator, eta=eta, theta2=SectorAngle.from_tan(tan_theta), name=name
        )

    @classmethod
    def constant(cls, entries: npt.ArrayLike, name: str = "constant") -> CoefficientField:
        matrix = CoefficientMatrix(np.asarray(entries, dtype=np.float64))

        def evaluator(points: FloatArray) -> FloatArray:
            result: FloatArray = np.broadcast_to(
                matrix.entries, (len(points),) + matrix.entries.shape
            ).copy()
            return result

        return cls(evaluator=evaluator, eta=matrix.eta, theta2=sector_angle(matrix), name=name)

    def matrices(self, points: npt.ArrayLike) -> FloatArray:
        return self.evaluator(np.atleast_2d(np.asarray(points, dtype=np.float64)))

    def matrix_at(self, point: npt.ArrayLike) -> CoefficientMatrix:
        return CoefficientMatrix(self.matrices(point)[0])


def coefficient_constants(matrices: FloatArray) -> tuple[float, float]:
    """
    Smallest ellipticity constant and largest sector tangent over a stack of matrices.
    """
    s, _ = _split_stack(np.asarray(matrices, dtype=np.float64))
    eta = float(np.min(np.linalg.eigvalsh(s)))
    if not eta > 0:
        raise ValueError(f"Coefficient field is not uniformly elliptic: eta = {eta}")
    return eta, float(np.max(sector_tangents(matrices)))


def rotation_coefficient(kappa: float) -> CoefficientField:
    """
    The constant matrix ``[[1, kappa], [-kappa, 1]]``, with ``tan(theta_2) = |kappa|``.
    """
    return CoefficientField.constant([[1.0, kappa], [-kappa, 1.0]], name=f"rotation {kappa:g}")


def varying_coefficient(kappa: float, sample_points: npt.ArrayLike) -> CoefficientField:
    """
    A smooth field with symmetric part ``[[1 + x^2/2, 0.2], [0.2, 1 + y^2/2]]`` and antisymmetric
    part ``kappa * (1 + sin(pi x y)) / 2`` times the rotation generator.
    """

    def evaluator(points: FloatArray) -> FloatArray:
        x, y = points[:, 0], points[:, 1]
        twist = kappa * 0.5 * (1 + np.sin(np.pi * x * y))
        result = np.empty((len(points), 2, 2))
        result[:, 0, 0] = 1 + 0.5 * x**2
        result[:, 1, 1] = 1 + 0.5 * y**2
        result[:, 0, 1] = 0.2 + twist
        result[:, 1, 0] = 0.2 - twist
        return result

    return CoefficientField.from_samples(evaluator, sample_points, name=f"varying {kappa:g}")


@dataclass(frozen=True)
class ChainRuleReport:
    max_discrepancy: float
    discrepancies: dict[str, float]
    excluded_points: FloatArray


def verify_chain_rule(
    u_field: Callable[[FloatArray], ComplexArray],
    alpha: float,
    grid: npt.ArrayLike,
    gradient: Optional[Callable[[FloatArray], ComplexArray]] = None,
    step: float = 1e-6,
) -> ChainRuleReport:
    """
    Compare the chain-rule identities for ``|u|``, ``|u|^alpha`` and ``|u|^(alpha-1) u`` with
    central finite differences on a grid of points.

    Arguments:
        u_field: Smooth complex function, maps points of shape (n, d) to values of shape (n,).
        alpha: Exponent, at least 1.
        grid: Evaluation points, shape (n, d).
        gradient: Gradient of ``u_field``, shape (n, d). Finite differences are used if omitted.
        step: Finite difference step.

    Return:
        The largest discrepancy per identity. Grid points where u vanishes are excluded and
        listed in the report.
    """
    if alpha < 1:
        raise ValueError(f"Chain rule exponent must be at least 1, got {alpha}")

    points = np.atleast_2d(np.asarray(grid, dtype=np.float64))
    values = np.asarray(u_field(points), dtype=np.complex128)
    vanishing = np.abs(values) < 1e-12
    if np.any(vanishing):
        LOGGER.warning("Excluding %d grid points where u vanishes", int(np.sum(vanishing)))
    excluded = points[vanishing]
    points = points[~vanishing]
    values = values[~vanishing]

    def central_difference(function: Callable[[FloatArray], ComplexArray]) -> ComplexArray:
        columns = []
        for axis in range(points.shape[1]):
            offset = np.zeros(points.shape[1])
            offset[axis] = step
            columns.append((function(points + offset) - function(points - offset)) / (2 * step))
        result: ComplexArray = np.stack(columns, axis=-1)
        return result

    grad_u = (
        np.asarray(gradient(points), dtype=np.complex128)
        if gradient is not None
        else central_difference(u_field)
    )

    modulus = np.abs(values)
    grad_modulus = np.real(np.conj(values / modulus)[:, None] * grad_u)
    grad_power = (alpha * modulus ** (alpha - 1))[:, None] * grad_modulus
    grad_product = ((alpha - 1) * modulus ** (alpha - 2) * values)[:, None] * grad_modulus + (
        modulus ** (alpha - 1)
    )[:, None] * grad_u

    def modulus_of(sample: FloatArray) -> ComplexArray:
        return np.abs(u_field(sample)).astype(np.complex128)

    def power_of(sample: FloatArray) -> ComplexArray:
        return (np.abs(u_field(sample)) ** alpha).astype(np.complex128)

    def product_of(sample: FloatArray) -> ComplexArray:
        sample_values = u_field(sample)
        result: ComplexArray = np.abs(sample_values) ** (alpha - 1) * sample_values
        return result

    discrepancies = {}
    for name, analytic, function in [
        ("modulus", grad_modulus, modulus_of),
        ("power", grad_power, power_of),
        ("product", grad_product, product_of),
    ]:
        difference = np.abs(analytic - central_difference(function))
        discrepancies[name] = float(np.max(difference)) if difference.size else 0.0

    return ChainRuleReport(
        max_discrepancy=max(discrepancies.values()),
        discrepancies=discrepancies,
        excluded_points=excluded,
    )
