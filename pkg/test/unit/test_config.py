# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

# Standard libraries
import re

# Third party libraries
import numpy as np
import pytest

# First party libraries
from elliptic_sectors import SCENARIOS_DIRECTORY
from elliptic_sectors.cli_runner.config import (
    CoefficientSpec,
    ConfigError,
    load_config,
    parse_config,
)
from elliptic_sectors.mesh_fem import FormDomainFlavor

MINIMAL = "domain = square\ntasks = numrange\n"


def test_minimal_scenario_gets_defaults():
    scenario = parse_config(MINIMAL, name="minimal")
    assert scenario.name == "minimal"
    assert scenario.tasks == ("numrange",)
    assert scenario.resolution == 16
    assert scenario.flavors == (FormDomainFlavor.SUPPORT_AWAY,)
    assert scenario.p_values == (2.0,)
    assert scenario.coefficient == CoefficientSpec()
    assert scenario.ultra_t_min is None
    assert not scenario.plots
    assert scenario.lines == {"domain": 1, "tasks": 2}


def test_full_scenario():
    text = """\
# Comment line
domain = lshape   # trailing comment
resolution = 6
flavor = both
dirichlet = bottom
robin = reentrant: 0.5, outer:2
dynamic = left
coefficient = rotation 1.5
p = 2, 3,4
tasks = numrange, robin, dynamic
seed = 7
samples = 10
workers = 3
sector_tolerance = 1e-8
resolvent_radii = 0.1, 10, 4
ultra_t_min = 0.001
ultra_t_max = 0.05
ultra_expected_slope = -1
ultra_slope_tolerance = 0.2
plots = yes
"""
    scenario = parse_config(text)
    assert scenario.domain == "lshape"
    assert scenario.flavors == (FormDomainFlavor.SUPPORT_AWAY, FormDomainFlavor.SMOOTH_CLOSURE)
    assert scenario.dirichlet == {"bottom"}
    assert scenario.robin == {"reentrant": 0.5, "outer": 2.0}
    assert scenario.dynamic == {"left"}
    assert scenario.coefficient.describe() == "rotation 1.5"
    assert scenario.p_values == (2.0, 3.0, 4.0)
    assert scenario.resolvent_radii == (0.1, 10.0, 4)
    assert scenario.ultra_expected_slope == -1.0
    assert scenario.plots
    assert scenario.lines["domain"] == 2

    partition = scenario.partition()
    assert partition.labels == {"bottom", "reentrant", "outer", "left"}

    data = scenario.to_dict()
    assert data["flavors"] == ["support_away", "smooth_closure"]
    assert data["robin"] == {"outer": 2.0, "reentrant": 0.5}
    assert data["coefficient"] == "rotation 1.5"


@pytest.mark.parametrize(
    "text, message",
    [
        ("domain square", "Line 1: expected 'key = value'"),
        ("colour = red", "Line 1: unknown key 'colour'"),
        (MINIMAL + "domain = lshape", "Line 3: key 'domain' already given on line 1"),
        ("domain =\ntasks = numrange", "Line 1: key 'domain' has no value"),
        (MINIMAL + "resolution = 0", "Line 3: bad value for 'resolution'"),
        (MINIMAL + "resolution = many", "Line 3: bad value for 'resolution'"),
        (MINIMAL + "seed = -1", "Line 3: bad value for 'seed'"),
        (MINIMAL + "samples = 2.5", "Line 3: bad value for 'samples'"),
        (MINIMAL + "sector_tolerance = 0", "Line 3: bad value for 'sector_tolerance'"),
        (MINIMAL + "ultra_expected_slope = nan", "Line 3: bad value for 'ultra_expected_slope'"),
        (MINIMAL + "plots = maybe", "expected true or false"),
        (MINIMAL + "flavor = neither", "flavor must be 'both'"),
        (MINIMAL + "robin = bottom", "expected 'label:b'"),
        (MINIMAL + "robin = bottom:-1", "must be nonnegative"),
        (MINIMAL + "coefficient = rotation", "takes 1 numbers"),
        (MINIMAL + "coefficient = spiral 1", "Unknown coefficient 'spiral'"),
        (MINIMAL + "coefficient = matrix 1 0 0 -1", "not uniformly elliptic"),
        (MINIMAL + "p = 1", "exponent p must be greater than 1"),
        (MINIMAL + "p = ,", "at least one exponent"),
        ("domain = square\ntasks = numrange, heat", "Line 2: bad value for 'tasks'"),
        (MINIMAL + "resolvent_radii = 1, 2", "expected 'smallest, largest, count'"),
        (MINIMAL + "resolvent_radii = 2, 1, 3", "largest radius is smaller"),
        ("domain = square", "missing required key 'tasks'"),
        ("tasks = numrange", "missing required key 'domain'"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(ConfigError, match=re.escape(message)):
        parse_config(text)


@pytest.mark.parametrize(
    "text, message",
    [
        ("domain = hexagon\ntasks = numrange", "Line 1: Unknown domain preset 'hexagon'"),
        (MINIMAL + "dirichlet = north", "Line 3: labels ['north'] do not exist on 'square'"),
        ("domain = slit_disc\ntasks = numrange\nresolution = 1", "Line 3: slit_disc needs"),
        (
            MINIMAL + "dirichlet = left\nrobin = left:1",
            "Line 4: Robin coefficients given on Dirichlet labels: ['left']",
        ),
        (
            MINIMAL + "dynamic = top\ndirichlet = top",
            "Line 3: Dynamic boundary overlaps the Dirichlet part",
        ),
        ("domain = square\ntasks = robin", "Line 2: task 'robin' needs Robin coefficients"),
        ("domain = square\ntasks = dynamic", "Line 2: task 'dynamic' needs a dynamic boundary"),
        (MINIMAL + "p = 1.5, 3", "Line 3: tasks ['numrange'] need every p >= 2"),
        (
            "domain = square\ntasks = containment\np = 1.5",
            "Line 3: tasks ['containment'] need every p >= 2",
        ),
        (
            "domain = square\ntasks = containment\nresolution = 1",
            "Line 3: task 'containment' meshes the slit disc and needs resolution at least 2",
        ),
        (
            MINIMAL + "ultra_t_min = 0.2\nultra_t_max = 0.1",
            "Line 3: ultra_t_min must be smaller than ultra_t_max",
        ),
        (MINIMAL + "ultra_t_max = 2", "Line 3: ultra_t_max must be at most 1"),
    ],
)
def test_validation_errors(text, message):
    with pytest.raises(ConfigError, match=re.escape(message)):
        parse_config(text)


def test_exponents_below_two_are_allowed_off_the_pairing_tasks():
    scenario = parse_config("domain = square\ntasks = semigroup, hardy\np = 1.5")
    assert scenario.p_values == (1.5,)


def test_config_error_keeps_line_number():
    with pytest.raises(ConfigError) as exception_info:
        parse_config("domain = square\n\nsamples = -3\ntasks = numrange")
    assert exception_info.value.line_number == 3

    assert ConfigError("plain").line_number is None
    assert str(ConfigError("plain")) == "plain"


def test_overrides():
    scenario = parse_config(MINIMAL)
    changed = scenario.with_overrides(seed=5, tasks=["geometry", "hardy"])
    assert changed.seed == 5
    assert changed.tasks == ("geometry", "hardy")
    assert scenario.seed == 0
    assert scenario.with_overrides() == scenario

    with pytest.raises(ConfigError, match="Seed must be nonnegative"):
        scenario.with_overrides(seed=-1)
    with pytest.raises(ConfigError, match="Unknown task 'heat'"):
        scenario.with_overrides(tasks=["heat"])
    with pytest.raises(ConfigError, match="needs Robin coefficients"):
        scenario.with_overrides(tasks=["robin"])


def test_load_config(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(MINIMAL, encoding="utf-8")
    assert load_config(path).name == "small"

    with pytest.raises(ConfigError, match="could not read scenario file"):
        load_config(tmp_path / "missing.cfg")


def test_shipped_scenarios_are_valid():
    paths = sorted(SCENARIOS_DIRECTORY.glob("*.cfg"))
    assert paths
    for path in paths:
        assert load_config(path).name == path.stem


def test_coefficient_spec_fields():
    points = np.random.default_rng(0).uniform(size=(50, 2))
    assert CoefficientSpec().field(points).theta2.theta == pytest.approx(0.0)
    assert CoefficientSpec("rotation", (1.0,)).field(points).theta2.tan_theta == pytest.approx(1.0)
    assert CoefficientSpec("varying", (1.0,)).field(points).theta2.theta > 0

    matrix = CoefficientSpec("matrix", (2.0, 1.0, -1.0, 2.0))
    assert matrix.describe() == "matrix 2 1 -1 2"
    assert matrix.field(points).theta2.tan_theta == pytest.approx(0.5)

    with pytest.raises(ValueError, match="takes 4 numbers"):
        CoefficientSpec("matrix", (1.0,))
