# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

# Standard libraries
import logging
import math

# Third party libraries
import numpy as np
import pytest

# First party libraries
from elliptic_sectors import semigroup_lab
from elliptic_sectors.mesh_fem import BoundaryPartition, assemble, cusp_mesh, square_mesh
from elliptic_sectors.operator_lab import DiscreteOperator
from elliptic_sectors.sector_math import CoefficientField, rotation_coefficient
from elliptic_sectors.semigroup_lab import (
    ContractionRow,
    UltraReport,
    contraction_scan,
    crank_nicolson,
    default_times,
    evolve,
    local_mesh_size,
    mass_drift,
    operator_norm,
    positivity_check,
    propagator,
    semigroup_law_error,
    ultracontractive_norm,
    ultracontractivity_fit,
    whitened_exponential,
)

IDENTITY = CoefficientField.constant(np.eye(2), name="identity")
TIMES = [0.0, 0.001, 0.01, 0.1, 1.0]


def operator_for(coefficient=IDENTITY, resolution=4, **partition):
    system = assemble(square_mesh(resolution), coefficient, BoundaryPartition(**partition))
    return DiscreteOperator(system)


@pytest.mark.parametrize("lumped", [False, True])
def test_propagator_at_time_zero_is_identity(lumped):
    operator = operator_for(rotation_coefficient(1.0), dirichlet={"left"})
    assert np.allclose(propagator(operator, 0.0, lumped=lumped), np.eye(operator.size))


def test_propagator_is_real_for_real_times():
    operator = operator_for(rotation_coefficient(1.0))
    assert not np.iscomplexobj(propagator(operator, 0.1))
    assert np.iscomplexobj(propagator(operator, 0.1 + 0.05j))


def test_propagator_solves_the_mass_weighted_equation():
    operator = operator_for(rotation_coefficient(0.5), dirichlet={"left"})
    # d/dt exp(-tA) = -A exp(-tA), with A = M^-1 K.
    step = 1e-6
    derivative = (propagator(operator, 0.1 + step) - propagator(operator, 0.1 - step)) / (2 * step)
    generator = np.linalg.solve(operator.dense_mass, operator.dense_form)
    assert np.allclose(derivative, -generator @ propagator(operator, 0.1), atol=1e-5)


def test_negative_time_is_rejected():
    operator = operator_for()
    with pytest.raises(ValueError, match="nonnegative real part"):
        whitened_exponential(operator, -0.1)
    with pytest.raises(ValueError, match="nonnegative real part"):
        propagator(operator, -1 + 1j)


def test_contraction_in_hilbert_case():
    operator = operator_for(rotation_coefficient(1.0), dirichlet={"left"}, robin={"top": 1.0})
    limit = math.pi / 2 - operator.theta2.theta - 0.01
    rows = contraction_scan(operator, 2, TIMES, arguments=(0.0, limit, -limit))

    assert len(rows) == 15
    assert all(row.asserted and row.passed for row in rows)
    assert rows[0].norm == pytest.approx(1.0)


@pytest.mark.parametrize("p", [1, math.inf])
def test_lumped_contraction_for_z_matrix(p):
    operator = operator_for()
    assert operator.z_matrix
    rows = contraction_scan(operator, p, TIMES)
    assert all(row.asserted and row.passed for row in rows)
    # Neumann conditions conserve mass, so the norm stays one.
    assert [row.norm for row in rows] == pytest.approx([1.0] * len(TIMES), abs=1e-9)


def test_complex_times_are_informational_off_hilbert_space():
    operator = operator_for()
    rows = contraction_scan(operator, math.inf, [0.1], arguments=(0.3,))
    assert not rows[0].asserted


def test_contraction_scan_arguments():
    operator = operator_for(rotation_coefficient(1.0))
    with pytest.raises(ValueError, match="p in"):
        contraction_scan(operator, 3, TIMES)
    with pytest.raises(ValueError, match="sector of analyticity"):
        contraction_scan(operator, 2, TIMES, arguments=(math.pi / 4,))
    with pytest.raises(ValueError, match="nonnegative"):
        contraction_scan(operator, 2, [-0.1])


def test_contraction_row():
    assert ContractionRow(t=1.0, argument=0.0, p=2, norm=1 + 1e-10, asserted=True).passed
    assert not ContractionRow(t=1.0, argument=0.0, p=2, norm=1 + 1e-8, asserted=True).passed
    assert ContractionRow(t=1.0, argument=0.0, p=1, norm=1 + 1e-8, asserted=False).passed
    row = ContractionRow(t=0.5, argument=0.1, p=1, norm=0.9, asserted=False).row()
    assert row == [0.5, 0.1, 1, 0.9, True, False]


def test_positivity():
    operator = operator_for(dirichlet={"left"})
    rows = positivity_check(operator, [0.001, 0.01, 0.1])
    assert all(row.asserted and row.passed for row in rows)


def test_semigroup_law():
    operator = operator_for(rotation_coefficient(1.0), dirichlet={"left"})
    assert semigroup_law_error(operator, 0.01, 0.02 * np.exp(0.3j)) < 1e-10
    assert semigroup_law_error(operator, 0.05, 0.05) < 1e-10


def test_mass_is_conserved_for_neumann_conditions():
    operator = operator_for(rotation_coefficient(1.0))
    initial = np.random.default_rng(0).uniform(size=operator.size)
    assert mass_drift(operator, initial, [0.01, 0.1, 1.0]) < 1e-10

    with_dirichlet = operator_for(rotation_coefficient(1.0), dirichlet={"left"})
    assert mass_drift(with_dirichlet, np.ones(with_dirichlet.size), [0.1]) > 1e-3


def test_operator_norm():
    matrix = np.array([[1.0, -2.0], [0.5, 0.0]])
    weights = np.array([1.0, 2.0])
    assert operator_norm(matrix, math.inf) == pytest.approx(3.0)
    # Columns weighted by w_i / w_j: (1 + 1) / 1 and (2 + 0) / 2.
    assert operator_norm(matrix, 1, weights) == pytest.approx(2.0)
    assert operator_norm(np.eye(3), 2) == pytest.approx(1.0)

    with pytest.raises(ValueError, match="lumped mass"):
        operator_norm(matrix, 1)
    with pytest.raises(ValueError, match="p in"):
        operator_norm(matrix, 3)


def test_ultracontractive_norm_of_identity():
    weights = np.array([0.25, 0.5, 1.0])
    identity = np.eye(3)
    assert ultracontractive_norm(identity, weights, 1.0, math.inf) == pytest.approx(4.0)
    assert ultracontractive_norm(identity, weights, 1.0, 2.0) == pytest.approx(2.0)
    assert ultracontractive_norm(identity, weights, 2.0, math.inf) == pytest.approx(2.0)
    with pytest.raises(ValueError, match="Unsupported exponent pair"):
        ultracontractive_norm(identity, weights, 2.0, 4.0)


def test_evolve():
    operator = operator_for(rotation_coefficient(1.0), dirichlet={"left"})
    initial = np.random.default_rng(1).standard_normal(operator.size)

    snapshot = evolve(operator, 0.0, initial)
    assert snapshot.method == "identity"
    assert np.array_equal(snapshot.values, initial)

    snapshot = evolve(operator, 0.05, initial)
    assert snapshot.method == "expm"
    assert np.allclose(snapshot.values, propagator(operator, 0.05) @ initial)
    assert evolve(operator_for(dirichlet={"left"}), 0.05, np.ones(20)).method == "eigh"

    with pytest.raises(ValueError, match="Expected 20 initial values"):
        evolve(operator, 0.05, np.ones(3))


@pytest.mark.parametrize("lumped", [False, True])
def test_crank_nicolson_matches_exponential(lumped):
    operator = operator_for(rotation_coefficient(1.0), dirichlet={"left"})
    initial = np.random.default_rng(2).standard_normal(operator.size)
    exact = propagator(operator, 0.1, lumped=lumped) @ initial

    snapshot = crank_nicolson(operator, 0.1, initial, lumped=lumped)
    assert snapshot.method == "crank_nicolson"
    assert snapshot.steps >= 32
    assert np.linalg.norm(snapshot.values - exact) <= 1e-4 * np.linalg.norm(exact)


def test_evolve_above_dense_budget_marches(monkeypatch):
    monkeypatch.setattr(semigroup_lab, "DENSE_BUDGET", 5)
    operator = operator_for(dirichlet={"left"})
    snapshot = evolve(operator, 0.01, np.ones(operator.size))
    assert snapshot.method == "crank_nicolson"


def test_default_times():
    operator = operator_for(resolution=16)
    times = default_times(operator)
    assert len(times) == 12
    assert times[0] == pytest.approx(operator.system.mesh.h**2)
    assert times[-1] == pytest.approx(0.1)


def test_heat_kernel_decay_on_square():
    operator = operator_for(resolution=16)
    report = ultracontractivity_fit(
        operator, np.geomspace(0.02, 0.1, 6), expected_slope=-1.0, slope_tolerance=0.25, workers=2
    )
    assert report.reliable
    assert report.within_expected
    assert np.all(np.diff(report.norms) < 0)
    assert len(report.rows()) == 6
    assert report.to_dict()["target"] == "inf"


def test_ultracontractivity_fit_arguments():
    operator = operator_for()
    with pytest.raises(ValueError, match="at least two"):
        ultracontractivity_fit(operator, [0.1])
    with pytest.raises(ValueError, match="strictly increasing"):
        ultracontractivity_fit(operator, [0.1, 0.05])
    with pytest.raises(ValueError, match="strictly increasing"):
        ultracontractivity_fit(operator, [0.5, 2.0])
    with pytest.raises(ValueError, match="Unsupported exponent pair"):
        ultracontractivity_fit(operator, [0.1, 0.2], pair=(2.0, 4.0))


def test_local_mesh_size():
    operator = operator_for()
    sizes = [local_mesh_size(operator, index) for index in range(operator.size)]
    assert np.allclose(sizes, operator.system.mesh.h)

    cusp = DiscreteOperator(assemble(cusp_mesh(8), IDENTITY, BoundaryPartition()))
    assert local_mesh_size(cusp, 0) < 0.2 < cusp.system.mesh.h


def test_ultracontractivity_fit_warns_below_local_mesh_scale(caplog):
    with caplog.at_level(logging.WARNING, logger="elliptic_sectors.semigroup_lab"):
        ultracontractivity_fit(operator_for(), [0.01, 0.05])
    assert "around the peak node" in caplog.text


def test_ultracontractivity_fit_on_cusp_uses_mesh_size_at_peak(caplog):
    operator = DiscreteOperator(assemble(cusp_mesh(8), IDENTITY, BoundaryPartition()))
    times = np.geomspace(0.06, 0.2, 4)
    assert times[0] < operator.system.mesh.h**2
    with caplog.at_level(logging.WARNING, logger="elliptic_sectors.semigroup_lab"):
        report = ultracontractivity_fit(operator, times)
    assert "around the peak node" not in caplog.text
    assert np.all(np.isfinite(report.norms))


def test_ultra_report_implied_exponents():
    report = UltraReport(
        source=1.0,
        target=math.inf,
        times=np.array([0.1, 0.2]),
        norms=np.array([1.0, 0.25]),
        slope=-2.0,
        intercept=0.0,
        residual=0.0,
    )
    assert report.implied_gamma == pytest.approx(2.0)
    assert report.implied_beta == pytest.approx(4.0)
    assert report.within_expected is None

    flat = UltraReport(1.0, 2.0, np.array([0.1, 0.2]), np.ones(2), -0.25, 0.0, 0.5, -0.5)
    # Slope -0.25 over 1/p - 1/q = 1/2 gives gamma 1/2.
    assert flat.implied_beta == math.inf
    assert not flat.reliable
    assert flat.within_expected is False
