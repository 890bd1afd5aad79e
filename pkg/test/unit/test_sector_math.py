# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

# Standard libraries
import math

# Third party libraries
import numpy as np
import pytest

# First party libraries
from elliptic_sectors.sector_math import (
    CoefficientField,
    CoefficientMatrix,
    SectorAngle,
    coefficient_constants,
    gradient_split,
    pairing_density,
    pairing_integrand,
    rotation_coefficient,
    sector_angle,
    sector_argument,
    split,
    theta_p,
    varying_coefficient,
    verify_chain_rule,
)


@pytest.mark.parametrize(
    "p, expected_tan",
    [(2, 0.0), (3, 1 / (2 * math.sqrt(2))), (4, 1 / math.sqrt(3)), (10, 4 / 3)],
)
def test_theta_p_for_symmetric_coefficient(p, expected_tan):
    assert theta_p(SectorAngle.from_angle(0.0), p).tan_theta == pytest.approx(
        expected_tan, abs=1e-12
    )


def test_theta_p_at_two_is_theta_2():
    theta2 = SectorAngle.from_tan(0.7)
    assert theta_p(theta2, 2) is theta2


def test_theta_p_uses_dual_exponent_below_two():
    theta2 = SectorAngle.from_tan(0.5)
    assert theta_p(theta2, 1.5).theta == pytest.approx(theta_p(theta2, 3).theta, abs=1e-15)


def test_theta_p_grows_with_p():
    theta2 = SectorAngle.from_tan(0.5)
    angles = [theta_p(theta2, p).theta for p in (2, 3, 4, 8, 100)]
    assert angles == sorted(angles)
    assert all(angle < math.pi / 2 for angle in angles)


@pytest.mark.parametrize("p", [1, 0.5, -2])
def test_theta_p_rejects_exponent_at_most_one(p):
    with pytest.raises(ValueError, match="greater than 1"):
        theta_p(SectorAngle.from_angle(0.0), p)


def test_sector_angle_rejects_right_angle():
    with pytest.raises(ValueError):
        SectorAngle.from_angle(math.pi / 2)
    with pytest.raises(ValueError):
        SectorAngle.from_tan(-1.0)


def test_sector_contains():
    sector = SectorAngle.from_angle(math.pi / 4)
    assert sector.contains(0)
    assert sector.contains(1 + 0.99j)
    assert not sector.contains(1 + 1.01j)
    assert sector.contains(1 + 1.01j, tolerance=0.01)
    assert not sector.contains(-1)


def test_sector_argument_maps_zero_to_zero():
    assert sector_argument([0, 1j, -1, 1 - 1j]).tolist() == pytest.approx(
        [0, math.pi / 2, math.pi, math.pi / 4]
    )


@pytest.mark.parametrize("kappa", [0.0, 0.5, 1.0, -2.0])
def test_rotation_coefficient_sector_angle(kappa):
    field = rotation_coefficient(kappa)
    assert field.theta2.tan_theta == pytest.approx(abs(kappa), abs=1e-12)
    assert field.eta == pytest.approx(1.0)
    assert field.name == f"rotation {kappa:g}"


def test_sector_angle_of_scaled_symmetric_part():
    # s = diag(1, 4), t = [[0, 1], [-1, 0]]: s^(-1/2) t s^(-1/2) has norm 1/2.
    matrix = CoefficientMatrix(np.array([[1.0, 1.0], [-1.0, 4.0]]))
    assert sector_angle(matrix).tan_theta == pytest.approx(0.5)
    assert matrix.eta == pytest.approx(1.0)


def test_split_sums_to_matrix():
    matrix = CoefficientMatrix(np.array([[2.0, 1.5], [-0.5, 3.0]]))
    s, t = split(matrix)
    assert np.allclose(s, s.T)
    assert np.allclose(t, -t.T)
    assert np.allclose(s + t, matrix.entries)


def test_non_elliptic_matrix_is_rejected():
    with pytest.raises(ValueError, match="not uniformly elliptic"):
        CoefficientMatrix(np.array([[1.0, 0.0], [0.0, -1.0]]))
    with pytest.raises(ValueError, match="not uniformly elliptic"):
        coefficient_constants(np.array([[[0.0, 1.0], [-1.0, 0.0]]]))


def test_complex_matrix_is_rejected():
    with pytest.raises(ValueError, match="must be real"):
        CoefficientMatrix(np.array([[1.0, 1j], [0.0, 1.0]]))


def test_constant_field_matrices():
    field = CoefficientField.constant([[2.0, 0.0], [0.0, 3.0]])
    matrices = field.matrices(np.zeros((5, 2)))
    assert matrices.shape == (5, 2, 2)
    assert field.matrix_at([0.3, 0.4]).eta == pytest.approx(2.0)
    assert field.theta2.theta == pytest.approx(0.0)


def test_varying_coefficient_constants_cover_samples():
    points = np.random.default_rng(4).uniform(-1, 1, size=(200, 2))
    field = varying_coefficient(1.0, points)
    eta, tan_theta = coefficient_constants(field.matrices(points))
    assert field.eta == pytest.approx(eta)
    assert field.theta2.tan_theta == pytest.approx(tan_theta)
    assert 0 < field.theta2.theta < math.pi / 2


def test_pairing_density_at_two_is_quadratic_form():
    rng = np.random.default_rng(0)
    entries = np.array([[1.0, 0.5], [-0.5, 1.0]])
    gradients = rng.normal(size=(10, 2)) + 1j * rng.normal(size=(10, 2))
    u_values = rng.normal(size=10) + 1j * rng.normal(size=10)

    expected = np.einsum("kl,nl,nk->n", entries, gradients, np.conj(gradients))
    assert np.allclose(pairing_density(u_values, gradients, entries, 2), expected)


@pytest.mark.parametrize("p", [3, 4, 7.5])
def test_pairing_density_matches_direct_product_rule(p):
    rng = np.random.default_rng(1)
    entries = np.array([[1.0, 0.8], [-0.8, 2.0]])
    u = complex(rng.normal(), rng.normal())
    grad_u = rng.normal(size=2) + 1j * rng.normal(size=2)

    # grad(|u|^(p-2) u) = (p-2) |u|^(p-3) grad|u| u + |u|^(p-2) grad u
    modulus = abs(u)
    grad_modulus = np.real(np.conj(u) / modulus * grad_u)
    grad_test = (p - 2) * modulus ** (p - 3) * grad_modulus * u + modulus ** (p - 2) * grad_u
    expected = np.vdot(grad_test, entries @ grad_u)

    assert pairing_integrand(u, grad_u, CoefficientMatrix(entries), p) == pytest.approx(
        expected, rel=1e-12
    )


@pytest.mark.parametrize("p", [2, 3, 4, 8])
@pytest.mark.parametrize("kappa", [0.0, 1.0])
def test_pairing_density_lies_in_sector(p, kappa):
    rng = np.random.default_rng(2)
    field = rotation_coefficient(kappa)
    count = 2000
    u_values = rng.normal(size=count) + 1j * rng.normal(size=count)
    gradients = rng.normal(size=(count, 2)) + 1j * rng.normal(size=(count, 2))

    values = pairing_density(u_values, gradients, field.matrices(np.zeros((1, 2)))[0], p)
    tan_theta = theta_p(field.theta2, p).tan_theta
    scale = np.abs(values) + 1

    assert np.all(values.real > 0)
    assert np.all(np.abs(values.imag) <= tan_theta * values.real + 1e-9 * scale)


def test_pairing_density_vanishes_with_u():
    entries = np.eye(2)
    value = pairing_density(np.array([0.0]), np.array([[1.0, 1j]]), entries, 4)
    assert value[0] == 0


def test_pairing_density_rejects_small_exponent():
    with pytest.raises(ValueError, match="p >= 2"):
        pairing_density(np.array([1.0]), np.array([[1.0, 0.0]]), np.eye(2), 1.5)


def test_gradient_split_real_positive_function():
    phi, psi = gradient_split(4.0, [1.0, 2.0], 3)
    # |u|^((p-2)/2) = 2 and p/2 = 1.5.
    assert phi.tolist() == pytest.approx([3.0, 6.0])
    assert psi.tolist() == pytest.approx([0.0, 0.0])

    phi, psi = gradient_split(0.0, [1.0, 2.0], 4)
    assert not np.any(phi) and not np.any(psi)


def test_chain_rule_identities():
    def u_field(points):
        return points[:, 0] + 1j * points[:, 1] + 0.3

    def gradient(points):
        return np.tile(np.array([1.0, 1j]), (len(points), 1))

    axis = np.linspace(-1, 1, 11)
    grid = np.array([[x, y] for x in axis for y in axis] + [[-0.3, 0.0]])

    report = verify_chain_rule(u_field, alpha=3.0, grid=grid, gradient=gradient)
    assert report.max_discrepancy < 1e-5
    assert set(report.discrepancies) == {"modulus", "power", "product"}
    assert report.excluded_points.tolist() == [[-0.3, 0.0]]


def test_chain_rule_with_finite_difference_gradient():
    def u_field(points):
        return np.exp(1j * points[:, 0]) * (2 + points[:, 1] ** 2)

    grid = np.random.default_rng(5).uniform(-1, 1, size=(50, 2))
    report = verify_chain_rule(u_field, alpha=1.5, grid=grid)
    assert report.max_discrepancy < 1e-4
    assert len(report.excluded_points) == 0


def test_chain_rule_rejects_small_alpha():
    with pytest.raises(ValueError, match="at least 1"):
        verify_chain_rule(lambda points: points[:, 0] + 0j, alpha=0.5, grid=[[0.5, 0.5]])
