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
from elliptic_sectors.regular_geometry import (
    ArclengthSet,
    DistanceField,
    PolylineSet,
    arclength_cover,
    branching_factor,
    check_regularity,
    christ_decompose,
    circle_polyline,
    collar_extension,
    default_regularity_report,
    distance_to_set,
    koch_polyline,
    mantle_generation,
    mantle_intervals,
    polyline_preset,
    read_polyline,
    regular_mantle,
    segment_polyline,
    square_boundary,
    verify_christ_properties,
    verify_mantle,
)


def test_polyline_lengths_and_points():
    square = square_boundary(2.0)
    assert square.total_length == pytest.approx(8.0)
    assert square.closed
    assert square.segment_count == 4
    assert square.point_at([1.0, 3.0, 100.0]).tolist() == [[1.0, 0.0], [2.0, 1.0], [0.0, 0.0]]


def test_polyline_needs_two_vertices():
    with pytest.raises(ValueError, match="at least two vertices"):
        PolylineSet.from_vertices([[0.0, 0.0]])


def test_polyline_rejects_non_finite_coordinates():
    with pytest.raises(ValueError, match="finite"):
        PolylineSet.from_vertices([[0.0, 0.0], [np.nan, 1.0]])


def test_polyline_rejects_zero_length_segments():
    with pytest.raises(ValueError, match="Segment 0 has zero length"):
        PolylineSet.from_vertices([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ValueError, match="Segment 1 has zero length"):
        PolylineSet.union([segment_polyline(), PolylineSet.point((0.0, 2.0))])

    point = PolylineSet.point((1.0, 2.0))
    assert point.segment_count == 1
    assert point.total_length == 0
    assert PolylineSet.empty().total_length == 0


@pytest.mark.parametrize(
    "vertices, pair",
    [
        ([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]], "0 and 2"),
        ([[0.0, 0.0], [2.0, 0.0], [1.0, 0.0]], "0 and 1"),
        ([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.5, 1.0], [0.5, -1.0]], "0 and 3"),
    ],
)
def test_polyline_rejects_self_intersection(vertices, pair):
    with pytest.raises(ValueError, match=f"Segments {pair} intersect in their interiors"):
        PolylineSet.from_vertices(vertices)


def test_polyline_allows_touching_segments():
    # Shared vertices, a closing vertex and a collinear continuation.
    assert square_boundary().segment_count == 4
    assert PolylineSet.from_vertices([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).total_length == 2
    tee = PolylineSet.union([segment_polyline(), segment_polyline((0.5, 0.0), (0.5, 1.0))])
    assert tee.total_length == 2


def test_clipped_length():
    segment = segment_polyline()
    assert segment.clipped_length([0.5, 0.0], 0.2) == pytest.approx(0.4)
    assert segment.clipped_length([0.0, 0.0], 0.25) == pytest.approx(0.25)
    assert segment.clipped_length([0.5, 0.3], 0.5) == pytest.approx(0.8)
    assert segment.clipped_length([5.0, 5.0], 1.0) == 0

    lengths = segment.clipped_length(np.array([[0.5, 0.0]]), np.array([[0.1], [0.2]]))
    assert lengths.shape == (2, 1)


def test_distance():
    segment = segment_polyline()
    distances = segment.distance([[0.5, 1.0], [2.0, 0.0], [0.25, 0.0]])
    assert distances.tolist() == pytest.approx([1.0, 1.0, 0.0])
    assert distance_to_set([[-3.0, 4.0]], segment).tolist() == pytest.approx([5.0])

    with pytest.raises(ValueError, match="empty set"):
        PolylineSet.empty().distance([[0.0, 0.0]])
    with pytest.raises(ValueError, match="empty set"):
        DistanceField(PolylineSet.empty())


def test_set_distance():
    bottom = segment_polyline()
    top = segment_polyline((0.0, 0.5), (1.0, 0.5))
    crossing = segment_polyline((0.5, -1.0), (0.5, 1.0))
    assert bottom.set_distance(top) == pytest.approx(0.5)
    assert bottom.set_distance(crossing) == 0
    with pytest.raises(ValueError):
        bottom.set_distance(PolylineSet.empty())


def test_diameter():
    assert square_boundary().diameter() == pytest.approx(math.sqrt(2))
    assert PolylineSet.empty().diameter() == 0
    assert circle_polyline(2.0).diameter() == pytest.approx(4.0)


def test_sub_polyline_and_restrict():
    square = square_boundary()
    piece = square.sub_polyline(1.5, 2.5)
    assert piece.total_length == pytest.approx(1.0)
    assert np.allclose(piece.vertices, [[1.0, 0.5], [1.0, 1.0], [0.5, 1.0]])

    restricted = square.restrict(ArclengthSet.from_intervals([(0.0, 0.5), (2.0, 2.0)]))
    assert restricted.total_length == pytest.approx(0.5)
    assert square.sub_polyline(5.0, 6.0).is_empty

    rows = PolylineSet.union([segment_polyline(), segment_polyline((0.0, 1.0), (1.0, 1.0))])
    across = rows.sub_polyline(0.5, 1.5)
    assert across.starts.tolist() == [[0.5, 0.0], [0.0, 1.0]]
    assert across.ends.tolist() == [[1.0, 0.0], [0.5, 1.0]]


def test_ball_preimage():
    square = square_boundary()
    preimage = square.ball_preimage([0.0, 0.0], 0.2)
    assert np.allclose(preimage.intervals, [(0.0, 0.2), (3.8, 4.0)])


def test_arclength_set_merges_intervals():
    intervals = ArclengthSet.from_intervals([(3.0, 4.0), (0.0, 1.0), (0.5, 2.0)])
    assert intervals.intervals == ((0.0, 2.0), (3.0, 4.0))
    assert intervals.measure == pytest.approx(3.0)
    assert ArclengthSet.from_points([1.0]).measure == 0
    assert not ArclengthSet.from_points([1.0]).is_empty

    with pytest.raises(ValueError, match="before its start"):
        ArclengthSet.from_intervals([(1.0, 0.0)])


def test_arclength_set_subtract_and_contains():
    whole = ArclengthSet(((0.0, 4.0),))
    cut = ArclengthSet.from_intervals([(1.0, 2.0), (3.0, 5.0)])
    difference = whole.subtract(cut)
    assert difference.intervals == ((0.0, 1.0), (2.0, 3.0))
    assert whole.contains(difference)
    assert not difference.contains(whole)
    assert difference.union(cut).intervals == ((0.0, 5.0),)


def test_boundary_points():
    closed = ArclengthSet.from_intervals([(0.0, 1.0), (3.0, 4.0)])
    assert closed.boundary_points(4.0, closed=True) == [1.0, 3.0]
    assert closed.boundary_points(4.0, closed=False) == [1.0, 3.0]
    assert ArclengthSet.from_intervals([(0.0, 1.0)]).boundary_points(4.0, closed=True) == [0.0, 1.0]
    assert ArclengthSet.from_intervals([(0.0, 0.5)]).boundary_points(1.0, closed=False) == [0.5]


def test_regularity_of_circle():
    report = check_regularity(circle_polyline(), 1, [0.01, 0.1, 1.0], [[1.0, 0.0], [0.0, -1.0]])
    assert report.passed
    # A disc of radius r around a circle point holds an arc of length about 2 r.
    assert report.c_lower == pytest.approx(2.0, rel=0.05)
    assert report.to_dict()["passed"]


def test_regularity_arguments():
    segment = segment_polyline()
    with pytest.raises(ValueError, match="dimension 1"):
        check_regularity(segment, 2, [0.1], [[0.0, 0.0]])
    with pytest.raises(ValueError, match=r"\(0, 1\]"):
        check_regularity(segment, 1, [2.0], [[0.0, 0.0]])
    with pytest.raises(ValueError, match="at least one"):
        check_regularity(segment, 1, [], [[0.0, 0.0]])


@pytest.mark.parametrize("name", ["segment", "circle", "square", "koch3"])
def test_presets_are_regular(name):
    assert default_regularity_report(polyline_preset(name)).passed


def test_koch_polyline():
    assert koch_polyline(0).total_length == pytest.approx(1.0)
    assert koch_polyline(2).segment_count == 16
    assert koch_polyline(2).total_length == pytest.approx((4 / 3) ** 2)
    assert koch_polyline(3).vertices[-1].tolist() == pytest.approx([1.0, 0.0])
    with pytest.raises(ValueError, match="nonnegative"):
        koch_polyline(-1)


def test_polyline_preset_names():
    assert polyline_preset("koch2").segment_count == 16
    with pytest.raises(ValueError, match="Unknown polyline preset"):
        polyline_preset("spiral")


def test_read_polyline():
    polyline = read_polyline("# triangle\n0 0\n1 0\n\n1 1  # corner\n0 0\n")
    assert polyline.closed
    assert polyline.total_length == pytest.approx(2 + math.sqrt(2))
    assert not read_polyline("0 0\n1 0\n").closed

    with pytest.raises(ValueError, match="Line 2"):
        read_polyline("0 0\n1 2 3\n")
    with pytest.raises(ValueError, match="Line 1"):
        read_polyline("zero 0\n")


@pytest.mark.parametrize("delta, expected", [(0.5, 2), (1 / 3, 3), (0.25, 4)])
def test_branching_factor(delta, expected):
    assert branching_factor(delta) == expected


@pytest.mark.parametrize("delta", [0.4, 0.0, 1.0, 0.7])
def test_branching_factor_rejects_non_reciprocal(delta):
    with pytest.raises(ValueError):
        branching_factor(delta)


def test_christ_cells_of_segment():
    tree = christ_decompose(segment_polyline(), delta=0.5, max_generation=6)
    assert tree.depth == 6
    assert tree.generations[3].cell_count == 8
    # Cells are intervals, so diameter equals length and the inner ball is half the cell.
    assert tree.c1 == pytest.approx(1.0)
    assert tree.a0 == pytest.approx(0.5)

    report = verify_christ_properties(tree)
    assert report.passed, report.failures
    assert report.coverage and report.nesting and report.disjointness
    assert report.to_dict()["failures"] == []


@pytest.mark.parametrize("name", ["square", "circle"])
def test_christ_properties_hold(name):
    tree = christ_decompose(polyline_preset(name), delta=0.5, max_generation=8)
    report = verify_christ_properties(tree)
    assert report.passed, report.failures
    assert tree.a0 > 0
    assert math.isfinite(tree.c1)


def test_christ_properties_hold_for_koch_in_thirds():
    tree = christ_decompose(polyline_preset("koch3"), delta=1 / 3, max_generation=8)
    assert tree.branching == 3
    assert tree.a0 == pytest.approx(0.451, abs=1e-3)
    assert tree.c1 == pytest.approx(2.370, abs=1e-3)

    report = verify_christ_properties(tree)
    assert report.passed, report.failures


def test_christ_decompose_arguments():
    with pytest.raises(ValueError, match="at least one generation"):
        christ_decompose(segment_polyline(), delta=0.5, max_generation=0)
    with pytest.raises(ValueError, match="zero length"):
        christ_decompose(PolylineSet.empty(), delta=0.5, max_generation=2)


def test_cells_meeting():
    tree = christ_decompose(segment_polyline(), delta=0.5, max_generation=4)
    subset = ArclengthSet.from_intervals([(0.1, 0.2), (1.0, 1.0)])
    assert tree.cells_meeting(3, subset).tolist() == [0, 1, 7]


def test_mantle_of_a_point():
    tree = christ_decompose(segment_polyline(), delta=0.5, max_generation=8)
    xi = ArclengthSet.from_points([0.3])

    assert mantle_generation(tree, 0.1) == 4
    assert np.allclose(mantle_intervals(xi, 0.1, tree).intervals, [(0.25, 0.3125)])
    assert regular_mantle(xi, 0.1, tree).total_length == pytest.approx(0.0625)

    report = verify_mantle(xi, 0.1, tree)
    assert report.passed, report.to_dict()
    assert report.max_added_diameter <= 0.1


def test_mantle_of_koch_subset():
    tree = christ_decompose(koch_polyline(3), delta=0.5, max_generation=10)
    total_length = tree.curve.total_length
    xi = ArclengthSet.from_intervals([(0.1, 0.2), (0.5 * total_length, 0.5 * total_length)])
    report = verify_mantle(xi, 0.05, tree)
    assert report.contained
    assert report.within_rho
    assert report.regular


def test_mantle_arguments():
    tree = christ_decompose(segment_polyline(), delta=0.5, max_generation=3)
    with pytest.raises(ValueError, match="empty set"):
        mantle_intervals(ArclengthSet(), 0.1, tree)
    with pytest.raises(ValueError, match="positive"):
        mantle_generation(tree, 0.0)
    with pytest.raises(ValueError, match="depth 3"):
        mantle_intervals(ArclengthSet.from_points([0.5]), 0.01, tree)
    with pytest.raises(ValueError, match="within"):
        mantle_intervals(ArclengthSet.from_intervals([(0.5, 2.0)]), 0.1, tree)


def test_arclength_cover():
    square = square_boundary()
    bottom = segment_polyline()
    assert np.allclose(arclength_cover(square, bottom).intervals, [(0.0, 1.0)])

    left_half = segment_polyline((0.0, 1.0), (0.0, 0.5))
    assert np.allclose(arclength_cover(square, left_half).intervals, [(3.0, 3.5)])


def test_collar_keeps_away_from_dirichlet():
    square = square_boundary()
    bottom = segment_polyline()
    collar = collar_extension(square, bottom, epsilon=0.1)

    assert not collar.is_empty
    assert collar.set_distance(bottom) >= 0.05
    assert collar.total_length > 2.5
    assert default_regularity_report(collar).c_lower > 0


def test_collar_edge_cases():
    square = square_boundary()
    assert collar_extension(square, PolylineSet.empty(), epsilon=0.1) is square
    assert collar_extension(square, square, epsilon=0.1).is_empty
    # Everything outside the left side is within 2 epsilon of its endpoints.
    assert collar_extension(square, segment_polyline((0.0, 1.0), (0.0, 0.0)), epsilon=2.0).is_empty

    with pytest.raises(ValueError, match="positive"):
        collar_extension(square, square, epsilon=0.0)
    with pytest.raises(ValueError, match="does not lie on the boundary"):
        collar_extension(square, segment_polyline((0.5, 0.5), (0.6, 0.5)), epsilon=0.1)
