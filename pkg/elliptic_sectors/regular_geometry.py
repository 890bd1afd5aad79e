# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

"""
Regular sets of dimension one realized as planar polylines.

Provides exact Hausdorff measures of ball intersections, dyadic cell trees indexed by arclength,
regular mantles of subsets and the collar construction that separates a boundary part from the
Dirichlet set.
"""

# Future libraries
from __future__ import annotations

# Standard libraries
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

# Third party libraries
import numpy as np
import numpy.typing as npt
from scipy.spatial import KDTree
from scipy.spatial.distance import pdist

LOGGER = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

CIRCLE_VERTEX_COUNT = 2**10

# Keeps point/segment pair arrays at a manageable size.
_CHUNK_ELEMENTS = 2_000_000

# Relative slack of the segment crossing and overlap tests.
_SIMPLICITY_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class PolylineSet:
    """
    A finite union of planar segments with pairwise disjoint interiors.

    Segments are ordered, and arclength is counted along them in that order, so a polyline built
    from a vertex list is parametrized by arclength in the usual way.
    Every segment has positive length, except for a single point stored as one segment of length
    zero. The empty set is allowed since collars may come out empty.
    """

    starts: FloatArray
    ends: FloatArray
    closed: bool = False
    arclength: FloatArray = field(init=False)

    def __post_init__(self) -> None:
        starts = np.asarray(self.starts, dtype=np.float64).reshape(-1, 2)
        ends = np.asarray(self.ends, dtype=np.float64).reshape(-1, 2)
        if starts.shape != ends.shape:
            raise ValueError(
                f"Mismatched segment arrays: {starts.shape} starts and {ends.shape} ends"
            )
        if not (np.all(np.isfinite(starts)) and np.all(np.isfinite(ends))):
            raise ValueError("Polyline coordinates must be finite")

        lengths = np.linalg.norm(ends - starts, axis=1)
        if len(lengths) > 1 or np.any(lengths > 0):
            degenerate = np.flatnonzero(lengths <= 0)
            if len(degenerate):
                raise ValueError(f"Segment {degenerate[0]} has zero length")
            crossing = _interior_crossing(starts, ends)
            if crossing is not None:
                raise ValueError(
                    f"Segments {crossing[0]} and {crossing[1]} intersect in their interiors, "
                    "the polyline set is not simple"
                )
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "ends", ends)
        object.__setattr__(self, "arclength", np.concatenate([[0.0], np.cumsum(lengths)]))

    @classmethod
    def from_vertices(cls, vertices: npt.ArrayLike, closed: bool = False) -> PolylineSet:
        points = np.asarray(vertices, dtype=np.float64).reshape(-1, 2)
        if len(points) < 2:
            raise ValueError(f"A polyline needs at least two vertices, got {len(points)}")
        if closed and not np.array_equal(points[0], points[-1]):
            points = np.vstack([points, points[:1]])
        return cls(starts=points[:-1], ends=points[1:], closed=closed)

    @classmethod
    def point(cls, coordinates: npt.ArrayLike) -> PolylineSet:
        """
        A single point, as a degenerate segment of length zero.
        """
        location = np.asarray(coordinates, dtype=np.float64).reshape(1, 2)
        return cls(starts=location, ends=location.copy())

    @classmethod
    def empty(cls) -> PolylineSet:
        return cls(starts=np.zeros((0, 2)), ends=np.zeros((0, 2)))

    @classmethod
    def union(cls, parts: Iterable[PolylineSet]) -> PolylineSet:
        parts = list(parts)
        if not parts:
            return cls.empty()
        return cls(
            starts=np.vstack([part.starts for part in parts]),
            ends=np.vstack([part.ends for part in parts]),
        )

    @property
    def segment_count(self) -> int:
        return int(len(self.starts))

    @property
    def is_empty(self) -> bool:
        return self.segment_count == 0

    @property
    def total_length(self) -> float:
        return float(self.arclength[-1])

    @property
    def vertices(self) -> FloatArray:
        result: FloatArray = np.vstack([self.starts, self.ends[-1:]])
        return result

    def point_at(self, arclength: npt.ArrayLike) -> FloatArray:
        """
        Points at the given arclength positions, clamped to [0, total length].
        """
        positions = np.clip(np.asarray(arclength, dtype=np.float64), 0.0, self.total_length)
        indices = np.clip(
            np.searchsorted(self.arclength, positions, side="right") - 1, 0, self.segment_count - 1
        )
        lengths = self.arclength[indices + 1] - self.arclength[indices]
        fraction = np.divide(
            positions - self.arclength[indices],
            lengths,
            out=np.zeros_like(positions),
            where=lengths > 0,
        )
        result: FloatArray = self.starts[indices] + fraction[..., None] * (
            self.ends[indices] - self.starts[indices]
        )
        return result

    def clipped_length(self, center: npt.ArrayLike, radius: npt.ArrayLike) -> FloatArray:
        """
        Exact one-dimensional measure of the set inside closed discs.

        Arguments:
            center: Disc centers, shape (..., 2).
            radius: Disc radii, broadcastable against the leading shape of ``center``.

        Return:
            Clipped lengths with the broadcast leading shape.
        """
        centers = np.asarray(center, dtype=np.float64)
        radii = np.asarray(radius, dtype=np.float64)
        shape = np.broadcast_shapes(centers.shape[:-1], radii.shape)
        centers = np.broadcast_to(centers, shape + (2,)).reshape(-1, 2)
        radii = np.broadcast_to(radii, shape).reshape(-1)

        result = np.zeros(len(radii))
        for chunk in _chunks(len(radii), self.segment_count):
            result[chunk] = _clipped_segment_lengths(
                self.starts, self.ends, centers[chunk], radii[chunk]
            ).sum(axis=1)
        reshaped: FloatArray = result.reshape(shape)
        return reshaped

    def distance(self, points: npt.ArrayLike) -> FloatArray:
        """
        Exact Euclidean distance from points of shape (..., 2) to the set.
        """
        if self.is_empty:
            raise ValueError("Distance to an empty set is undefined")

        query = np.asarray(points, dtype=np.float64)
        flat = query.reshape(-1, 2)
        result = np.empty(len(flat))
        for chunk in _chunks(len(flat), self.segment_count):
            result[chunk] = _point_segment_distances(flat[chunk], self.starts, self.ends).min(
                axis=1
            )
        reshaped: FloatArray = result.reshape(query.shape[:-1])
        return reshaped

    def sub_polyline(self, start: float, stop: float) -> PolylineSet:
        """
        The image of the arclength interval [start, stop].
        """
        lower = np.maximum(self.arclength[:-1], start)
        upper = np.minimum(self.arclength[1:], stop)
        keep = np.flatnonzero(upper > lower)
        offsets = self.arclength[keep]
        lengths = self.arclength[keep + 1] - offsets

        def along(position: FloatArray) -> FloatArray:
            fraction = ((position - offsets) / lengths)[:, None]
            inner = self.starts[keep] + fraction * (self.ends[keep] - self.starts[keep])
            result: FloatArray = np.where(fraction == 1.0, self.ends[keep], inner)
            return result

        starts, ends = along(lower[keep]), along(upper[keep])
        # Slivers can round to a single point.
        positive = np.any(ends != starts, axis=1)
        if not np.any(positive):
            return PolylineSet.empty()
        return PolylineSet(starts=starts[positive], ends=ends[positive])

    def restrict(self, intervals: ArclengthSet) -> PolylineSet:
        """
        The image of a set of arclength intervals. Degenerate intervals are dropped.
        """
        pieces = [
            self.sub_polyline(start, stop) for start, stop in intervals.intervals if stop > start
        ]
        return PolylineSet.union(pieces)

    def ball_preimage(self, center: npt.ArrayLike, radius: float) -> ArclengthSet:
        """
        Arclength intervals of the part of the set within ``radius`` of ``center``.
        """
        parameters = _disc_parameters(
            self.starts, self.ends, np.asarray(center, dtype=np.float64).reshape(1, 2), radius
        )
        lower, upper = parameters[0][0], parameters[1][0]
        lengths = np.diff(self.arclength)
        intervals = [
            (
                float(self.arclength[index] + lower[index] * lengths[index]),
                float(self.arclength[index] + upper[index] * lengths[index]),
            )
            for index in np.flatnonzero(upper > lower)
        ]
        return ArclengthSet.from_intervals(intervals)

    def diameter(self) -> float:
        """
        Diameter of the set, attained between two segment endpoints.
        """
        if self.is_empty:
            return 0.0
        return _point_cloud_diameter(np.vstack([self.starts, self.ends]))

    def set_distance(self, other: PolylineSet) -> float:
        """
        Exact distance between two nonempty polyline sets.
        """
        if self.is_empty or other.is_empty:
            raise ValueError("Distance to an empty set is undefined")

        if _any_segments_intersect(self.starts, self.ends, other.starts, other.ends):
            return 0.0
        return float(
            min(
                np.min(other.distance(self.starts)),
                np.min(other.distance(self.ends)),
                np.min(self.distance(other.starts)),
                np.min(self.distance(other.ends)),
            )
        )

    def arclength_samples(self, count: int) -> FloatArray:
        """
        ``count`` points equally spaced in arclength, endpoints included.
        """
        return self.point_at(np.linspace(0.0, self.total_length, count))

    def to_dict(self) -> dict[str, Any]:
        return {
            "segments": self.segment_count,
            "length": self.total_length,
            "closed": self.closed,
        }


@dataclass(frozen=True)
class ArclengthSet:
    """
    A finite union of closed arclength intervals, sorted and merged.
    A point is an interval with equal endpoints.
    """

    intervals: tuple[tuple[float, float], ...] = ()

    @classmethod
    def from_intervals(cls, intervals: Iterable[Sequence[float]]) -> ArclengthSet:
        cleaned = []
        for interval in intervals:
            start, stop = float(interval[0]), float(interval[1])
            if stop < start:
                raise ValueError(f"Interval end {stop} is before its start {start}")
            cleaned.append((start, stop))
        cleaned.sort()

        merged: list[tuple[float, float]] = []
        for start, stop in cleaned:
            if merged and start <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], stop))
            else:
                merged.append((start, stop))
        return cls(intervals=tuple(merged))

    @classmethod
    def from_points(cls, points: Iterable[float]) -> ArclengthSet:
        return cls.from_intervals((point, point) for point in points)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def measure(self) -> float:
        return sum(stop - start for start, stop in self.intervals)

    def union(self, other: ArclengthSet) -> ArclengthSet:
        return ArclengthSet.from_intervals(self.intervals + other.intervals)

    def subtract(self, other: ArclengthSet) -> ArclengthSet:
        """
        Set difference, keeping only pieces of positive length.
        """
        result = []
        for start, stop in self.intervals:
            pieces = [(start, stop)]
            for cut_start, cut_stop in other.intervals:
                remaining = []
                for piece_start, piece_stop in pieces:
                    if cut_stop <= piece_start or cut_start >= piece_stop:
                        remaining.append((piece_start, piece_stop))
                        continue
                    if cut_start > piece_start:
                        remaining.append((piece_start, cut_start))
                    if cut_stop < piece_stop:
                        remaining.append((cut_stop, piece_stop))
                pieces = remaining
            result.extend(piece for piece in pieces if piece[1] > piece[0])
        return ArclengthSet.from_intervals(result)

    def contains(self, other: ArclengthSet, tolerance: float = 0.0) -> bool:
        return all(
            any(
                start - tolerance <= other_start and other_stop <= stop + tolerance
                for start, stop in self.intervals
            )
            for other_start, other_stop in other.intervals
        )

    def boundary_points(self, total_length: float, closed: bool) -> list[float]:
        """
        Interval endpoints that are relative boundary points inside a curve of the given length.
        """
        points = []
        for start, stop in self.intervals:
            points.extend([start, stop])

        if closed and len(self.intervals) > 0:
            # 0 and total length are the same point on a closed curve.
            if self.intervals[0][0] <= 0 and self.intervals[-1][1] >= total_length:
                points = points[1:-1]
        else:
            points = [point for point in points if 0 < point < total_length]

        return sorted(set(points))


@dataclass(frozen=True, eq=False)
class RegularityReport:
    """
    Lower and upper ratios ``H_N(E cap B_r(x)) / r^N`` over the sampled points and radii.
    """

    dimension: int
    c_lower: float
    c_upper: float
    radii: FloatArray
    samples: FloatArray
    lower_witness: tuple[tuple[float, float], float]

    @property
    def passed(self) -> bool:
        return self.c_lower > 0 and math.isfinite(self.c_upper)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dimension": self.dimension,
            "c_lower": self.c_lower,
            "c_upper": self.c_upper,
            "radii": self.radii.tolist(),
            "sample_count": len(self.samples),
            "lower_witness": {
                "point": list(self.lower_witness[0]),
                "radius": self.lower_witness[1],
            },
            "passed": self.passed,
        }


def check_regularity(
    curve: PolylineSet,
    dimension: int,
    radii: npt.ArrayLike,
    samples: npt.ArrayLike,
) -> RegularityReport:
    """
    Sampled Ahlfors regularity constants of a polyline set.

    Arguments:
        curve: The set.
        dimension: Hausdorff dimension N. Polylines realize dimension one only.
        radii: Ball radii, all in (0, 1].
        samples: Ball centers on ``curve``, shape (n, 2).

    Return:
        Report with the smallest and largest measure ratio and the pair attaining the smallest.
    """
    if dimension != 1:
        raise ValueError(f"Polyline sets realize dimension 1 only, got {dimension}")

    radii = np.atleast_1d(np.asarray(radii, dtype=np.float64))
    samples = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
    if radii.size == 0 or samples.size == 0:
        raise ValueError("Regularity check needs at least one radius and one sample point")
    if np.any(radii <= 0) or np.any(radii > 1):
        raise ValueError(f"Radii must be in (0, 1], got {radii.tolist()}")

    ratios = curve.clipped_length(samples[:, None, :], radii[None, :]) / radii[None, :] ** dimension
    sample_index, radius_index = np.unravel_index(np.argmin(ratios), ratios.shape)
    witness_point = samples[sample_index]

    return RegularityReport(
        dimension=dimension,
        c_lower=float(ratios.min()),
        c_upper=float(ratios.max()),
        radii=radii,
        samples=samples,
        lower_witness=(
            (float(witness_point[0]), float(witness_point[1])),
            float(radii[radius_index]),
        ),
    )


def default_regularity_report(curve: PolylineSet) -> RegularityReport:
    """
    Regularity over the vertices and 65 equally spaced points, radii log-spaced from 1e-3 to 1.
    """
    samples = np.vstack([curve.vertices, curve.arclength_samples(65)])
    return check_regularity(curve=curve, dimension=1, radii=np.logspace(-3, 0, 13), samples=samples)


@dataclass(frozen=True, eq=False)
class ChristGeneration:
    """
    Cells of one generation. Cell ``j`` is the image of the arclength interval
    ``[j, j + 1) * cell_length``, the last cell of an open curve being closed on the right.
    """

    level: int
    cell_length: float
    parents: npt.NDArray[np.int64]
    centers: FloatArray
    diameters: FloatArray
    inner_radii: FloatArray

    @property
    def cell_count(self) -> int:
        return int(len(self.parents))

    def bounds(self) -> tuple[FloatArray, FloatArray]:
        return _cell_bounds(self.cell_count, self.cell_length * self.cell_count)


@dataclass(frozen=True, eq=False)
class ChristTree:
    """
    Dyadic cells on a rectifiable curve with branching factor ``1 / delta``.
    """

    curve: PolylineSet
    delta: float
    branching: int
    a0: float
    c1: float
    lower_constant: float
    generations: tuple[ChristGeneration, ...]

    @property
    def depth(self) -> int:
        return len(self.generations) - 1

    def cells_meeting(self, level: int, subset: ArclengthSet) -> npt.NDArray[np.int64]:
        """
        Indices of the generation ``level`` cells that intersect a set of arclength intervals.
        """
        count = self.branching**level
        cell_length = self.curve.total_length / count
        selected: set[int] = set()
        for start, stop in subset.intervals:
            first = min(int(math.floor(start / cell_length)), count - 1)
            last = min(int(math.floor(stop / cell_length)), count - 1)
            selected.update(range(max(first, 0), last + 1))
        return np.array(sorted(selected), dtype=np.int64)

    def to_dict(self) -> dict[str, Any]:
        return {
            "delta": self.delta,
            "depth": self.depth,
            "a0": self.a0,
            "c1": self.c1,
            "lower_constant": self.lower_constant,
            "cells": sum(generation.cell_count for generation in self.generations),
        }


def branching_factor(delta: float) -> int:
    """
    Number of children per cell. Nesting requires ``1 / delta`` to be an integer of at least 2.
    """
    if not 0 < delta < 1:
        raise ValueError(f"Cell ratio delta must be in (0, 1), got {delta}")
    branching = int(round(1 / delta))
    if branching < 2 or abs(branching * delta - 1) > 1e-9:
        raise ValueError(f"1/delta must be an integer of at least 2, got delta = {delta}")
    return branching


def christ_decompose(curve: PolylineSet, delta: float, max_generation: int) -> ChristTree:
    """
    Build arclength dyadic cells on a regular curve and measure their constants.

    Arguments:
        curve: A connected rectifiable curve.
        delta: Cell ratio between generations, the reciprocal of an integer.
        max_generation: Deepest generation to build, at least 1.

    Return:
        The tree, with ``a0`` the smallest inner ball ratio over generations 1 and deeper, and
        ``c1`` the largest diameter ratio.
    """
    branching = branching_factor(delta)
    if max_generation < 1:
        raise ValueError(
            f"Tree needs at least one generation below the root, got {max_generation}"
        )
    if curve.is_empty or curve.total_length <= 0:
        raise ValueError("Cannot decompose a set of zero length")

    regularity = default_regularity_report(curve)
    if not regularity.passed:
        point, radius = regularity.lower_witness
        raise ValueError(
            f"Set is not 1-regular: measure ratio {regularity.c_lower} at point {point}, "
            f"radius {radius}"
        )

    generations = []
    for level in range(max_generation + 1):
        count = branching**level
        cell_length = curve.total_length / count
        starts, stops = _cell_bounds(count, curve.total_length)
        centers = curve.point_at(starts + cell_length / 2)
        generations.append(
            ChristGeneration(
                level=level,
                cell_length=cell_length,
                parents=np.arange(count, dtype=np.int64) // branching,
                centers=centers,
                diameters=_cell_diameters(curve, starts, stops),
                inner_radii=_distance_outside(curve, centers, starts, stops),
            )
        )

    scales = [delta**generation.level for generation in generations[1:]]
    a0 = min(
        float(np.min(generation.inner_radii)) / scale
        for generation, scale in zip(generations[1:], scales)
    )
    c1 = max(
        float(np.max(generation.diameters)) / delta**generation.level
        for generation in generations
    )
    LOGGER.debug(
        "Cell tree with %d generations: a0 = %.6g, c1 = %.6g", max_generation, a0, c1
    )

    return ChristTree(
        curve=curve,
        delta=delta,
        branching=branching,
        a0=a0,
        c1=c1,
        lower_constant=regularity.c_lower,
        generations=tuple(generations),
    )


@dataclass(frozen=True)
class ChristPropertyReport:
    coverage: bool
    nesting: bool
    disjointness: bool
    diameter_decay: bool
    inner_ball: bool
    measure_bound: bool
    a0: float
    c1: float
    measure_constant: float
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict[str, Any]:
        return {
            "coverage": self.coverage,
            "nesting": self.nesting,
            "disjointness": self.disjointness,
            "diameter_decay": self.diameter_decay,
            "inner_ball": self.inner_ball,
            "measure_bound": self.measure_bound,
            "a0": self.a0,
            "c1": self.c1,
            "measure_constant": self.measure_constant,
            "failures": list(self.failures),
        }


def verify_christ_properties(tree: ChristTree) -> ChristPropertyReport:
    """
    Check coverage, nesting, disjointness, diameter decay, inner balls and the measure lower bound
    on every stored cell. Failures are listed in the report, never raised.
    """
    failures = []
    total_length = tree.curve.total_length
    relative = 1e-12
    measure_ratios = []

    for generation in tree.generations:
        count = generation.cell_count
        scale = tree.delta**generation.level
        indices = np.arange(count)

        # Cells are integer index intervals [j, j+1) in units of the cell length.
        if count != tree.branching**generation.level:
            failures.append(f"coverage: generation {generation.level} has {count} cells")
        if generation.level > 0:
            parents = generation.parents
            if not np.array_equal(parents, indices // tree.branching):
                failures.append(f"nesting: generation {generation.level} parent table")
            if not (
                np.all(parents * tree.branching <= indices)
                and np.all(indices < (parents + 1) * tree.branching)
            ):
                failures.append(f"nesting: generation {generation.level} cell outside parent")
        if np.any(np.diff(indices) != 1):
            failures.append(f"disjointness: generation {generation.level} index gaps")

        starts, stops = generation.bounds()
        if abs(stops[-1] - total_length) > relative * total_length:
            failures.append(f"coverage: generation {generation.level} ends at {stops[-1]}")

        bound = tree.c1 * scale * (1 + relative)
        for index in np.flatnonzero(generation.diameters > bound):
            failures.append(
                f"diameter: cell ({generation.level}, {index}) has diameter "
                f"{generation.diameters[index]} above {tree.c1 * scale}"
            )

        if generation.level > 0:
            radius = tree.a0 * scale
            for index in np.flatnonzero(generation.inner_radii < radius * (1 - relative)):
                failures.append(
                    f"inner ball: cell ({generation.level}, {index}) has inner radius "
                    f"{generation.inner_radii[index]} below {radius}"
                )

            measured = np.array(
                [
                    tree.curve.sub_polyline(start, stop).total_length
                    for start, stop in zip(starts, stops)
                ]
            )
            if not np.allclose(measured, generation.cell_length, rtol=1e-9, atol=0):
                failures.append(f"measure: generation {generation.level} cell lengths")
            measure_ratios.append(measured / radius)

    ratios = np.concatenate(measure_ratios) if measure_ratios else np.array([np.inf])
    measure_constant = float(np.min(ratios))
    if measure_constant < tree.lower_constant * (1 - 1e-9):
        failures.append(
            f"measure: cell measure ratio {measure_constant} below the regularity constant "
            f"{tree.lower_constant}"
        )

    def passed(prefix: str) -> bool:
        return not any(failure.startswith(prefix) for failure in failures)

    return ChristPropertyReport(
        coverage=passed("coverage"),
        nesting=passed("nesting"),
        disjointness=passed("disjointness"),
        diameter_decay=passed("diameter"),
        inner_ball=passed("inner ball"),
        measure_bound=passed("measure"),
        a0=tree.a0,
        c1=tree.c1,
        measure_constant=measure_constant,
        failures=tuple(failures),
    )


def mantle_generation(tree: ChristTree, rho: float) -> int:
    """
    Smallest generation whose cells are guaranteed to have diameter at most ``min(rho, 1)``.
    """
    if not rho > 0:
        raise ValueError(f"Mantle width must be positive, got {rho}")
    target = min(rho, 1.0)
    level = 0
    while tree.c1 * tree.delta**level > target:
        level += 1
    return level


def mantle_intervals(xi: ArclengthSet, rho: float, tree: ChristTree) -> ArclengthSet:
    """
    Arclength description of the regular mantle: ``xi`` together with every cell of the mantle
    generation that meets it.
    """
    if xi.is_empty:
        raise ValueError("Mantle of an empty set is undefined")
    total_length = tree.curve.total_length
    if xi.intervals[0][0] < 0 or xi.intervals[-1][1] > total_length:
        raise ValueError(f"Subset intervals must lie within [0, {total_length}]")

    level = mantle_generation(tree, rho)
    if level > tree.depth:
        raise ValueError(
            f"Cell tree has depth {tree.depth} but the mantle needs generation {level}"
        )

    cell_length = tree.generations[level].cell_length
    cells = tree.cells_meeting(level, xi)
    return xi.union(
        ArclengthSet.from_intervals(
            (index * cell_length, (index + 1) * cell_length) for index in cells
        )
    )


def regular_mantle(xi: ArclengthSet, rho: float, tree: ChristTree) -> PolylineSet:
    """
    The regular mantle of a subset of the tree's curve, as a point set.
    """
    return tree.curve.restrict(mantle_intervals(xi=xi, rho=rho, tree=tree))


@dataclass(frozen=True)
class MantleReport:
    generation: int
    contained: bool
    max_added_diameter: float
    max_sampled_distance: float
    within_rho: bool
    c_lower_small: float
    c_lower_large: float
    small_scale_bound: float
    large_scale_bound: float

    @property
    def regular(self) -> bool:
        return (
            self.c_lower_small >= self.small_scale_bound
            and self.c_lower_large >= self.large_scale_bound
        )

    @property
    def passed(self) -> bool:
        return self.contained and self.within_rho and self.regular

    def to_dict(self) -> dict[str, Any]:
        return {
            "generation": self.generation,
            "contained": self.contained,
            "max_added_diameter": self.max_added_diameter,
            "max_sampled_distance": self.max_sampled_distance,
            "within_rho": self.within_rho,
            "c_lower_small": self.c_lower_small,
            "c_lower_large": self.c_lower_large,
            "small_scale_bound": self.small_scale_bound,
            "large_scale_bound": self.large_scale_bound,
            "passed": self.passed,
        }


def verify_mantle(
    xi: ArclengthSet, rho: float, tree: ChristTree, sample_count: int = 64
) -> MantleReport:
    """
    Check containment and the distance bound of the mantle exactly, and its lower regularity
    constant on samples.
    Below the mantle cell size the expected ratio is ``c (a0 delta / c1)``, above it
    ``c a0 delta^M``, with 10 % slack on both.
    """
    curve = tree.curve
    level = mantle_generation(tree, rho)
    mantle = mantle_intervals(xi=xi, rho=rho, tree=tree)
    total_length = curve.total_length

    contained = mantle.contains(xi) and ArclengthSet(((0.0, total_length),)).contains(mantle)

    # Every added cell meets xi, so its diameter bounds the distance of its points to xi.
    cell_length = tree.generations[level].cell_length
    cells = tree.cells_meeting(level, xi)
    diameters = tree.generations[level].diameters[cells]
    max_added_diameter = float(np.max(diameters)) if len(diameters) else 0.0

    added = curve.restrict(mantle.subtract(xi))
    xi_pieces = []
    for start, stop in xi.intervals:
        piece = curve.sub_polyline(start, stop)
        xi_pieces.append(PolylineSet.point(curve.point_at(start)) if piece.is_empty else piece)
    if added.is_empty:
        max_sampled_distance = 0.0
    else:
        queries = np.vstack([added.vertices, added.arclength_samples(257)])
        distances = np.min([piece.distance(queries) for piece in xi_pieces], axis=0)
        max_sampled_distance = float(np.max(distances))

    mantle_set = curve.restrict(mantle)
    samples = np.vstack([mantle_set.starts, mantle_set.ends])
    samples = np.vstack([samples, mantle_set.arclength_samples(sample_count)])

    cutoff = tree.c1 * tree.delta**level
    small_radii = np.geomspace(min(cutoff, 1.0) * 1e-2, min(cutoff, 1.0), 7)
    small = check_regularity(mantle_set, 1, small_radii, samples)
    if cutoff < 1:
        large = check_regularity(mantle_set, 1, np.geomspace(cutoff * 1.01, 1.0, 7), samples)
        c_lower_large = large.c_lower
    else:
        c_lower_large = math.inf

    LOGGER.debug(
        "Mantle generation %d with %d added cells of length %.4g", level, len(cells), cell_length
    )

    return MantleReport(
        generation=level,
        contained=contained,
        max_added_diameter=max_added_diameter,
        max_sampled_distance=max_sampled_distance,
        within_rho=max_added_diameter <= rho and max_sampled_distance <= rho,
        c_lower_small=small.c_lower,
        c_lower_large=c_lower_large,
        small_scale_bound=0.9 * tree.lower_constant * tree.a0 * tree.delta / tree.c1,
        large_scale_bound=0.9 * tree.lower_constant * tree.a0 * tree.delta**level,
    )


def arclength_cover(
    curve: PolylineSet, part: PolylineSet, tolerance: float = 1e-12
) -> ArclengthSet:
    """
    Arclength intervals of ``curve`` covered by ``part``, which must be made of pieces of it.
    """
    intervals = []
    lengths = np.diff(curve.arclength)
    for index in range(curve.segment_count):
        start, end = curve.starts[index], curve.ends[index]
        direction = end - start
        length = lengths[index]
        if length == 0:
            continue
        for piece_start, piece_end in zip(part.starts, part.ends):
            offsets = np.array([piece_start - start, piece_end - start])
            cross = np.abs(direction[0] * offsets[:, 1] - direction[1] * offsets[:, 0]) / length
            if np.any(cross > tolerance):
                continue
            parameters = offsets @ direction / length**2
            lower = max(float(np.min(parameters)), 0.0)
            upper = min(float(np.max(parameters)), 1.0)
            if upper < lower - tolerance:
                continue
            upper = max(upper, lower)
            intervals.append(
                (
                    float(curve.arclength[index] + lower * length),
                    float(curve.arclength[index] + upper * length),
                )
            )
    return ArclengthSet.from_intervals(intervals)


def collar_extension(
    boundary: PolylineSet, dirichlet: PolylineSet, epsilon: float, delta: float = 0.5
) -> PolylineSet:
    """
    Regular part of the boundary that keeps away from the Dirichlet set.

    Removes ``dirichlet`` and everything within ``2 * epsilon`` of its relative boundary, then
    takes the regular mantle of width ``epsilon`` of what is left.

    Arguments:
        boundary: The boundary curve.
        dirichlet: Dirichlet part, made of pieces of ``boundary``. May be empty.
        epsilon: Collar width.
        delta: Cell ratio of the tree used for the mantle.

    Return:
        The collar, possibly empty.
    """
    if not epsilon > 0:
        raise ValueError(f"Collar width must be positive, got {epsilon}")

    total_length = boundary.total_length
    whole = ArclengthSet(((0.0, total_length),))
    covered = ArclengthSet() if dirichlet.is_empty else arclength_cover(boundary, dirichlet)
    if not dirichlet.is_empty and covered.is_empty:
        raise ValueError("Dirichlet set does not lie on the boundary")

    core = whole.subtract(covered)
    for point in covered.boundary_points(total_length, closed=boundary.closed):
        core = core.subtract(boundary.ball_preimage(boundary.point_at(point), 2 * epsilon))

    if core.is_empty:
        if whole.subtract(covered).is_empty:
            LOGGER.debug("Dirichlet set covers the boundary, collar is empty")
        else:
            LOGGER.warning(
                "Collar width %g leaves nothing of the boundary outside the Dirichlet set", epsilon
            )
        return PolylineSet.empty()

    if core.measure >= total_length:
        return boundary

    # Cell diameters never exceed their arclength, so c1 <= total length.
    branching = branching_factor(delta)
    depth = 1 + max(1, math.ceil(math.log(total_length / min(epsilon, 1.0)) / math.log(branching)))
    tree = christ_decompose(boundary, delta=delta, max_generation=depth)
    return regular_mantle(core, epsilon, tree)


@dataclass(frozen=True, eq=False)
class DistanceField:
    """
    Distance to a fixed nonempty set.
    """

    target: PolylineSet

    def __post_init__(self) -> None:
        if self.target.is_empty:
            raise ValueError("Distance to an empty set is undefined")

    def __call__(self, points: npt.ArrayLike) -> FloatArray:
        return self.target.distance(points)


def distance_to_set(points: npt.ArrayLike, target: PolylineSet) -> FloatArray:
    return DistanceField(target)(points)


def segment_polyline(
    start: Sequence[float] = (0.0, 0.0), end: Sequence[float] = (1.0, 0.0)
) -> PolylineSet:
    return PolylineSet.from_vertices([start, end])


def circle_polyline(
    radius: float = 1.0,
    center: Sequence[float] = (0.0, 0.0),
    vertex_count: int = CIRCLE_VERTEX_COUNT,
) -> PolylineSet:
    angles = np.linspace(0.0, 2 * np.pi, vertex_count, endpoint=False)
    vertices = np.column_stack([np.cos(angles), np.sin(angles)]) * radius + np.asarray(center)
    return PolylineSet.from_vertices(vertices, closed=True)


def square_boundary(side: float = 1.0) -> PolylineSet:
    """
    Counter-clockwise boundary of ``[0, side]^2`` starting at the origin.
    """
    return PolylineSet.from_vertices(
        [[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]], closed=True
    )


def koch_polyline(level: int) -> PolylineSet:
    """
    Koch curve prefractal over the unit segment, with ``4^level`` segments.
    """
    if level < 0:
        raise ValueError(f"Koch level must be nonnegative, got {level}")

    vertices = np.array([[0.0, 0.0], [1.0, 0.0]])
    cosine, sine = math.cos(math.pi / 3), math.sin(math.pi / 3)
    rotation = np.array([[cosine, -sine], [sine, cosine]])
    for _ in range(level):
        starts, ends = vertices[:-1], vertices[1:]
        step = (ends - starts) / 3
        first = starts + step
        peak = first + step @ rotation.T
        second = starts + 2 * step
        refined = np.stack([starts, first, peak, second], axis=1).reshape(-1, 2)
        vertices = np.vstack([refined, vertices[-1:]])

    return PolylineSet.from_vertices(vertices)


POLYLINE_PRESETS = {
    "segment": segment_polyline,
    "circle": circle_polyline,
    "square": square_boundary,
}


def polyline_preset(name: str) -> PolylineSet:
    """
    Named polyline: ``segment``, ``circle``, ``square`` or ``koch<level>``, e.g. ``koch3``.
    """
    if name in POLYLINE_PRESETS:
        return POLYLINE_PRESETS[name]()
    if name.startswith("koch") and name[4:].isdigit():
        return koch_polyline(int(name[4:]))
    raise ValueError(f"Unknown polyline preset: {name}")


def read_polyline(text: str, closed: Optional[bool] = None) -> PolylineSet:
    """
    Parse a vertex list with one "x y" pair per line. Text after "#" is ignored.
    The curve is closed if the last vertex repeats the first, unless ``closed`` says otherwise.
    """
    vertices = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        fields = content.split()
        if len(fields) != 2:
            raise ValueError(f"Line {line_number}: expected 'x y', got '{content}'")
        try:
            vertices.append([float(fields[0]), float(fields[1])])
        except ValueError as exception:
            raise ValueError(f"Line {line_number}: {exception}") from exception

    points = np.array(vertices, dtype=np.float64).reshape(-1, 2)
    if closed is None:
        closed = len(points) > 2 and bool(np.array_equal(points[0], points[-1]))
    return PolylineSet.from_vertices(points, closed=closed)


def _cell_bounds(count: int, total_length: float) -> tuple[FloatArray, FloatArray]:
    edges = np.arange(count + 1) * (total_length / count)
    # The last edge is pinned so that no sliver of the curve is left outside the last cell.
    edges[-1] = total_length
    return edges[:-1], edges[1:]


def _chunks(count: int, width: int) -> Iterable[slice]:
    step = max(1, _CHUNK_ELEMENTS // max(width, 1))
    for start in range(0, count, step):
        yield slice(start, min(start + step, count))


def _disc_parameters(
    starts: FloatArray, ends: FloatArray, centers: FloatArray, radius: npt.ArrayLike
) -> tuple[FloatArray, FloatArray]:
    """
    Segment parameters [lower, upper] inside discs, shape (centers, segments) each.
    Empty intersections have upper <= lower.
    """
    direction = ends - starts
    offset = starts[None, :, :] - centers[:, None, :]
    quadratic = np.einsum("sk,sk->s", direction, direction)[None, :]
    linear = 2 * np.einsum("csk,sk->cs", offset, direction)
    constant = np.einsum("csk,csk->cs", offset, offset) - np.asarray(radius).reshape(-1, 1) ** 2

    discriminant = linear**2 - 4 * quadratic * constant
    valid = (discriminant > 0) & (quadratic > 0)
    root = np.sqrt(np.where(valid, discriminant, 0.0))
    denominator = np.where(quadratic > 0, 2 * quadratic, 1.0)
    lower = np.clip((-linear - root) / denominator, 0.0, 1.0)
    upper = np.clip((-linear + root) / denominator, 0.0, 1.0)
    return np.where(valid, lower, 0.0), np.where(valid, upper, 0.0)


def _clipped_segment_lengths(
    starts: FloatArray, ends: FloatArray, centers: FloatArray, radii: FloatArray
) -> FloatArray:
    lower, upper = _disc_parameters(starts, ends, centers, radii)
    lengths = np.linalg.norm(ends - starts, axis=1)
    result: FloatArray = np.maximum(upper - lower, 0.0) * lengths[None, :]
    return result


def _point_segment_distances(
    points: FloatArray, starts: FloatArray, ends: FloatArray
) -> FloatArray:
    """
    Distances of shape (points, segments).
    """
    direction = ends - starts
    squared = np.einsum("sk,sk->s", direction, direction)
    offset = points[:, None, :] - starts[None, :, :]
    projection = np.einsum("psk,sk->ps", offset, direction)
    parameter = np.clip(
        np.divide(projection, squared, out=np.zeros_like(projection), where=squared > 0), 0.0, 1.0
    )
    nearest = starts[None, :, :] + parameter[..., None] * direction[None, :, :]
    result: FloatArray = np.linalg.norm(points[:, None, :] - nearest, axis=-1)
    return result


def _distance_outside(
    curve: PolylineSet, centers: FloatArray, starts: FloatArray, stops: FloatArray
) -> FloatArray:
    """
    Distance from each center to the curve outside the arclength interval [start, stop).
    Infinite where the interval is the whole curve.
    """
    lower_bounds = curve.arclength[:-1]
    upper_bounds = curve.arclength[1:]
    result = np.full(len(centers), np.inf)

    for chunk in _chunks(len(centers), curve.segment_count):
        cell_start = starts[chunk, None]
        cell_stop = stops[chunk, None]
        all_lower = np.broadcast_to(lower_bounds, (len(cell_start), len(lower_bounds)))
        all_upper = np.broadcast_to(upper_bounds, (len(cell_stop), len(upper_bounds)))
        pieces = [
            (all_lower, np.minimum(upper_bounds[None, :], cell_start)),
            (np.maximum(lower_bounds[None, :], cell_stop), all_upper),
        ]
        for piece_lower, piece_upper in pieces:
            valid = piece_upper > piece_lower
            first = curve.point_at(piece_lower)
            second = curve.point_at(piece_upper)
            direction = second - first
            squared = np.einsum("csk,csk->cs", direction, direction)
            offset = centers[chunk, None, :] - first
            projection = np.einsum("csk,csk->cs", offset, direction)
            parameter = np.clip(
                np.divide(projection, squared, out=np.zeros_like(projection), where=squared > 0),
                0.0,
                1.0,
            )
            distances = np.linalg.norm(offset - parameter[..., None] * direction, axis=-1)
            distances = np.where(valid, distances, np.inf)
            result[chunk] = np.minimum(result[chunk], distances.min(axis=1))

    return result


def _cell_diameters(curve: PolylineSet, starts: FloatArray, stops: FloatArray) -> FloatArray:
    vertex_arclength = curve.arclength
    vertices = curve.vertices
    first_inside = np.searchsorted(vertex_arclength, starts, side="right")
    last_inside = np.searchsorted(vertex_arclength, stops, side="left")
    start_points = curve.point_at(starts)
    stop_points = curve.point_at(stops)

    result = np.empty(len(starts))
    for index, (first, last) in enumerate(zip(first_inside, last_inside)):
        points = np.vstack([start_points[index], vertices[first:last], stop_points[index]])
        result[index] = _point_cloud_diameter(points)
    return result


def _point_cloud_diameter(points: FloatArray) -> float:
    if len(points) < 2:
        return 0.0
    return float(np.max(pdist(points)))


def _any_segments_intersect(
    first_starts: FloatArray,
    first_ends: FloatArray,
    second_starts: FloatArray,
    second_ends: FloatArray,
) -> bool:
    def orientation(a: FloatArray, b: FloatArray, c: FloatArray) -> FloatArray:
        result: FloatArray = (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (
            b[..., 1] - a[..., 1]
        ) * (c[..., 0] - a[..., 0])
        return result

    a, b = first_starts[:, None, :], first_ends[:, None, :]
    c, d = second_starts[None, :, :], second_ends[None, :, :]
    d1 = orientation(c, d, a)
    d2 = orientation(c, d, b)
    d3 = orientation(a, b, c)
    d4 = orientation(a, b, d)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)
    return bool(np.any(proper))


def _interior_crossing(starts: FloatArray, ends: FloatArray) -> Optional[tuple[int, int]]:
    """
    First pair of segments whose interiors meet, either in a single crossing point or along a
    collinear overlap. Segments that only touch at an endpoint are fine.
    """
    if len(starts) < 2:
        return None
    directions = ends - starts
    half_lengths = 0.5 * np.linalg.norm(directions, axis=1)
    reach = 2 * float(half_lengths.max()) * (1 + _SIMPLICITY_TOLERANCE)
    pairs = KDTree(0.5 * (starts + ends)).query_pairs(reach, output_type="ndarray")
    if len(pairs) == 0:
        return None
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    first, second = pairs[:, 0], pairs[:, 1]

    def cross(a: FloatArray, b: FloatArray) -> FloatArray:
        result: FloatArray = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        return result

    r, t = directions[first], directions[second]
    offset = starts[second] - starts[first]
    tolerance = _SIMPLICITY_TOLERANCE
    denominator = cross(r, t)
    transversal = np.abs(denominator) > tolerance * 4 * half_lengths[first] * half_lengths[second]
    safe = np.where(transversal, denominator, 1.0)
    s = cross(offset, t) / safe
    u = cross(offset, r) / safe
    crossing = transversal & (s > tolerance) & (s < 1 - tolerance)
    crossing &= (u > tolerance) & (u < 1 - tolerance)

    squared = np.einsum("pk,pk->p", r, r)
    collinear = ~transversal & (np.abs(cross(offset, r)) <= tolerance * squared)
    a = np.einsum("pk,pk->p", offset, r) / squared
    b = np.einsum("pk,pk->p", offset + t, r) / squared
    overlap = np.minimum(np.maximum(a, b), 1.0) - np.maximum(np.minimum(a, b), 0.0)
    collinear &= overlap > tolerance

    offending = np.flatnonzero(crossing | collinear)
    if len(offending) == 0:
        return None
    return int(first[offending[0]]), int(second[offending[0]])
