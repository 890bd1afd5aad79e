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
from pathlib import Path
from typing import Optional

# Third party libraries
import matplotlib
import numpy as np
from matplotlib.figure import Figure

# Local folder libraries
from ..operator_lab import FieldOfValuesBoundary, NumericalRangeSample
from .run import RunReport

LOGGER = logging.getLogger(__name__)

# Fixed element ids in the SVG output.
matplotlib.rcParams["svg.hashsalt"] = "elliptic-sectors"


def plot_numerical_range(
    sample: NumericalRangeSample,
    output_file: Path,
    boundary: Optional[FieldOfValuesBoundary] = None,
) -> Path:
    """
    Scatter of the normalized pairings with the sector rays at ``+-theta_p``.
    The plot is written even if there are no samples.
    """
    values = np.asarray(sample.values, dtype=np.complex128)
    extent = max(1.0, float(np.max(np.abs(values), initial=0.0)))

    figure = Figure(figsize=(5, 5))
    axes = figure.add_subplot()
    theta = sample.theta.theta
    for sign in (1, -1):
        axes.plot(
            [0, extent * math.cos(theta)],
            [0, sign * extent * math.sin(theta)],
            color="tab:red",
            linewidth=1,
        )
    if boundary is not None and sample.p == 2:
        closed = np.append(boundary.points, boundary.points[:1])
        axes.plot(closed.real, closed.imag, color="tab:gray", linewidth=1, label="field of values")
    if values.size:
        axes.scatter(values.real, values.imag, s=4, color="tab:blue", label="pairings")
        axes.legend(loc="upper left")

    axes.axhline(0, color="black", linewidth=0.5)
    axes.set_xlim(-0.05 * extent, 1.05 * extent)
    axes.set_ylim(-extent, extent)
    axes.set_xlabel("Re")
    axes.set_ylabel("Im")
    axes.set_title(f"p = {sample.p:g}, theta_p = {math.degrees(theta):.2f} deg")

    output_file.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(output_file, format="svg", metadata={"Date": None})
    return output_file


def emit_plots(report: RunReport, output_path: Path) -> list[Path]:
    """
    One SVG per exponent for every numerical range result of the report.
    """
    written = []
    for result in report.results:
        for sample in result.samples:
            output_file = output_path / f"{result.key}_p{sample.p:g}.svg"
            written.append(plot_numerical_range(sample, output_file, result.boundary))
    LOGGER.info("Wrote %d plots to %s", len(written), output_path)
    return written
