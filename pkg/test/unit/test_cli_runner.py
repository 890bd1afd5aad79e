# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

# Standard libraries
import json
import math

# Third party libraries
import numpy as np
import pytest

# First party libraries
from elliptic_sectors import SCENARIOS_DIRECTORY
from elliptic_sectors.cli_runner import tasks
from elliptic_sectors.cli_runner.config import CoefficientSpec, load_config, parse_config
from elliptic_sectors.cli_runner.main import (
    EXIT_CONFIG_ERROR,
    EXIT_FAILED,
    EXIT_PASSED,
    main,
)
from elliptic_sectors.cli_runner.run import (
    SCHEMA_VERSION,
    RunReport,
    TaskError,
    run,
    verdict_from_json,
    write_report,
)
from elliptic_sectors.cli_runner.tasks import TaskContext, TaskResult
from elliptic_sectors.mesh_fem import FormDomainFlavor
from elliptic_sectors.operator_lab import numerical_range_p, numerical_range_p2
from elliptic_sectors.regular_geometry import (
    christ_decompose,
    polyline_preset,
    verify_christ_properties,
)

SMALL = """\
domain = square
resolution = 4
coefficient = rotation 1
p = 2, 3
tasks = numrange, resolvent, semigroup
samples = 20
resolvent_radii = 0.1, 10, 3
seed = 4
plots = true
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL, encoding="utf-8")
    return path


def test_run_small_scenario(small_config, tmp_path):
    output_path = tmp_path / "out"
    assert main(["run", "--config", str(small_config), "--out", str(output_path)]) == EXIT_PASSED

    report = json.loads((output_path / "report.json").read_text(encoding="utf-8"))
    assert report["schema_version"] == SCHEMA_VERSION
    assert report["passed"]
    assert report["scenario"]["name"] == "small"
    tasks_run = [result["task"] for result in report["results"]]
    assert tasks_run == ["numrange", "resolvent", "semigroup"]
    assert verdict_from_json(output_path / "report.json")

    for stem in ["numrange", "spectrum", "field_of_values", "resolvent", "contraction"]:
        assert (output_path / f"{stem}_support_away.csv").exists()
    assert (output_path / "numrange_support_away_p2.svg").exists()
    assert (output_path / "numrange_support_away_p3.svg").exists()

    timing = json.loads((output_path / "timing.json").read_text(encoding="utf-8"))
    assert set(timing) == {
        "numrange_support_away",
        "resolvent_support_away",
        "semigroup_support_away",
    }


def test_reports_are_reproducible(small_config, tmp_path):
    for name in ["first", "second"]:
        assert main(["run", "--config", str(small_config), "--out", str(tmp_path / name)]) == 0

    for file_name in ["report.json", "numrange_support_away.csv", "resolvent_support_away.csv"]:
        first = (tmp_path / "first" / file_name).read_bytes()
        assert first == (tmp_path / "second" / file_name).read_bytes()


def test_command_line_overrides(small_config, tmp_path):
    output_path = tmp_path / "out"
    argv = ["run", "--config", str(small_config), "--out", str(output_path)]
    assert main(argv + ["--seed", "9", "--tasks", "semigroup"]) == EXIT_PASSED

    report = json.loads((output_path / "report.json").read_text(encoding="utf-8"))
    assert report["scenario"]["seed"] == 9
    assert report["scenario"]["tasks"] == ["semigroup"]
    assert not (output_path / "numrange_support_away.csv").exists()


def test_default_output_directory(small_config, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["run", "--config", str(small_config), "--tasks", "semigroup"]) == EXIT_PASSED
    assert (tmp_path / "generated" / "small" / "report.json").exists()


def test_validate_and_list_presets(small_config, capsys):
    assert main(["validate", "--config", str(small_config)]) == EXIT_PASSED
    assert "valid scenario 'small'" in capsys.readouterr().out

    assert main(["list-presets"]) == EXIT_PASSED
    output = capsys.readouterr().out
    assert "slit_disc: boundary labels circle, slit_upper, slit_lower" in output
    assert "Tasks: numrange, resolvent" in output


def test_bad_scenario_file_exits_with_two(tmp_path):
    path = tmp_path / "broken.cfg"
    path.write_text("domain = square\ntasks = numrange\ncolour = red\n", encoding="utf-8")
    assert main(["validate", "--config", str(path)]) == EXIT_CONFIG_ERROR
    assert main(["run", "--config", str(path)]) == EXIT_CONFIG_ERROR
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG_ERROR


def test_override_errors_exit_with_two(small_config):
    assert main(["run", "--config", str(small_config), "--seed", "-2"]) == EXIT_CONFIG_ERROR
    # Robin task without Robin coefficients.
    assert main(["run", "--config", str(small_config), "--tasks", "robin"]) == EXIT_CONFIG_ERROR


def test_unknown_task_on_command_line(small_config):
    with pytest.raises(SystemExit) as exception_info:
        main(["run", "--config", str(small_config), "--tasks", "heat"])
    assert exception_info.value.code == 2


def test_failed_check_exits_with_one(small_config, tmp_path, monkeypatch):
    def failing(_context, result):
        result.check("informational", False, asserted=False)
        result.check("always fails", False, value=2.0, bound=1.0)

    monkeypatch.setitem(tasks.TASK_FUNCTIONS, "semigroup", failing)
    output_path = tmp_path / "out"
    argv = ["run", "--config", str(small_config), "--out", str(output_path), "--tasks", "semigroup"]
    assert main(argv) == EXIT_FAILED

    # The report is still written.
    assert not verdict_from_json(output_path / "report.json")


def test_task_error_exits_with_one(small_config, tmp_path, monkeypatch):
    def broken(_context, _result):
        raise ValueError("boom")

    monkeypatch.setitem(tasks.TASK_FUNCTIONS, "semigroup", broken)
    argv = ["run", "--config", str(small_config), "--out", str(tmp_path), "--tasks", "semigroup"]
    assert main(argv) == EXIT_FAILED


def test_task_error_names_task_and_flavor(monkeypatch):
    def broken(_context, _result):
        raise RuntimeError("boom")

    monkeypatch.setitem(tasks.TASK_FUNCTIONS, "semigroup", broken)
    scenario = parse_config("domain = square\nresolution = 2\ntasks = semigroup")
    with pytest.raises(TaskError, match=r"Task semigroup \(support_away\) failed: boom"):
        run(scenario)


def test_flavor_independent_tasks_run_once(monkeypatch):
    calls = []

    def record(_context, result):
        calls.append(result.key)
        result.check("called", True)

    monkeypatch.setitem(tasks.TASK_FUNCTIONS, "geometry", record)
    monkeypatch.setitem(tasks.TASK_FUNCTIONS, "semigroup", record)
    scenario = parse_config(
        "domain = slit_disc\nresolution = 2\nflavor = both\ntasks = semigroup, geometry"
    )
    report = run(scenario)

    assert calls == ["semigroup_support_away", "semigroup_smooth_closure", "geometry"]
    assert report.passed
    assert list(report.timings) == calls


def test_slit_disc_flavors_differ():
    scenario = parse_config(
        "domain = slit_disc\nresolution = 3\nflavor = both\ndirichlet = circle\n"
        "tasks = numrange\nsamples = 10"
    )
    report = run(scenario)
    assert report.passed
    sizes = [result.metrics["operator"]["size"] for result in report.results]
    # Identifying the slit nodes removes two unknowns.
    assert sizes[0] == sizes[1] + 2


def test_task_context_streams_are_independent():
    scenario = parse_config("domain = square\nresolution = 2\ntasks = numrange\nseed = 3")
    context = TaskContext(scenario=scenario, flavor=FormDomainFlavor.SUPPORT_AWAY)
    first = context.rng("numrange").uniform(size=4)
    assert np.array_equal(first, context.rng("numrange").uniform(size=4))
    assert not np.array_equal(first, context.rng("numrange", 1).uniform(size=4))
    assert not np.array_equal(first, context.rng("resolvent").uniform(size=4))
    assert context.operator is context.operator


def test_task_result_verdict():
    result = TaskResult(task="semigroup", flavor=None)
    assert result.key == "semigroup"
    result.check("informational", False, asserted=False)
    assert result.passed
    result.check("asserted", False, value=np.float64(2.0), bound=1)
    assert not result.passed
    assert result.to_dict()["checks"][1] == {
        "name": "asserted",
        "passed": False,
        "asserted": True,
        "value": 2.0,
        "bound": 1.0,
    }


def test_write_report_serializes_special_values(tmp_path):
    scenario = parse_config("domain = square\ntasks = semigroup")
    result = TaskResult(task="semigroup", flavor=FormDomainFlavor.SMOOTH_CLOSURE)
    result.metrics["norm"] = math.inf
    result.metrics["eigenvalue"] = 1 + 2j
    result.metrics["flags"] = np.array([True, False])
    result.table("values", ["t", "norm"], [[0.1, 1.5], [0.2, math.inf]])
    result.check("fails", False)
    report = RunReport(scenario=scenario, results=[result], timings={result.key: 0.5})
    assert report.failed_checks() == ["semigroup_smooth_closure: fails"]

    written = write_report(report, tmp_path / "out")
    assert [path.name for path in written] == [
        "report.json",
        "timing.json",
        "values_smooth_closure.csv",
    ]

    data = json.loads(written[0].read_text(encoding="utf-8"))
    metrics = data["results"][0]["metrics"]
    assert metrics == {"norm": "inf", "eigenvalue": [1.0, 2.0], "flags": [True, False]}
    assert not data["passed"]
    assert written[2].read_text(encoding="utf-8") == "t,norm\n0.1,1.5\n0.2,inf\n"


def test_geometry_task_splits_koch_curve_in_thirds():
    delta, generations = tasks.CHRIST_TREES["koch3"]
    assert delta == pytest.approx(1 / 3)

    tree = christ_decompose(polyline_preset("koch3"), delta, generations)
    report = verify_christ_properties(tree)
    assert report.passed, report.failures


def test_containment_grid_runs_once_over_all_geometries():
    scenario = parse_config(
        "domain = square\nresolution = 2\nflavor = both\ntasks = containment\np = 2, 3\n"
        "samples = 4\nworkers = 2"
    )
    report = run(scenario)
    assert report.passed, report.failed_checks()

    (result,) = report.results
    assert result.key == "containment"
    assert result.metrics["cells"] == len(tasks.containment_cells()) == 75
    assert result.metrics["pairings"] == 75 * 2 * 4
    assert result.metrics["violations"] == 0

    header, rows = result.tables["containment"]
    assert header[:4] == ["domain", "flavor", "coefficient", "boundary"]
    assert {(row[0], row[1]) for row in rows} == {
        ("square", "support_away"),
        ("lshape", "support_away"),
        ("slit_disc", "support_away"),
        ("slit_disc", "smooth_closure"),
        ("cusp", "support_away"),
    }
    assert {row[2] for row in rows} == {
        "identity",
        "rotation 0.5",
        "rotation 1",
        "rotation 2",
        "varying 1",
    }
    assert {row[3] for row in rows} == {"robin 0", "robin 1", "dynamic"}

    count = result.checks[-1]
    assert count.name == "pairing count"
    assert not count.asserted
    assert not count.passed


def test_containment_grid_is_reproducible():
    scenario = parse_config("domain = square\nresolution = 2\ntasks = containment\nsamples = 3")
    first = run(scenario).results[0].tables["containment"]
    second = run(scenario).results[0].tables["containment"]
    assert first == second


def test_shipped_containment_scenario_reaches_pairing_target():
    scenario = load_config(SCENARIOS_DIRECTORY / "containment.cfg")
    assert scenario.p_values == (2.0, 3.0, 4.0, 8.0)
    pairings = len(tasks.containment_cells()) * len(scenario.p_values) * scenario.samples
    assert pairings >= tasks.CONTAINMENT_TARGET


def test_containment_cell_on_cusp_with_dirichlet_side():
    cell = tasks.ContainmentCell(
        domain="cusp",
        flavor=FormDomainFlavor.SUPPORT_AWAY,
        coefficient=CoefficientSpec("rotation", (2.0,)),
        robin=None,
    )
    assert cell.boundary == "dynamic"
    operator = cell.operator(8)
    assert operator.dynamic
    assert operator.system.partition.dirichlet == frozenset(["side"])
    assert operator.system.dynamic_edges.count > 0


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
def test_cusp_pairings_stay_in_sector(kappa):
    cell = tasks.ContainmentCell(
        domain="cusp",
        flavor=FormDomainFlavor.SUPPORT_AWAY,
        coefficient=CoefficientSpec("rotation", (kappa,)),
        robin=0.0,
    )
    operator = cell.operator(8)
    rng = np.random.default_rng(11)
    for p in [2.0, 3.0, 4.0, 8.0]:
        if p == 2:
            sample = numerical_range_p2(operator, 300, rng)
        else:
            sample = numerical_range_p(operator, p, 300, rng)
        assert sample.contained, sample.to_dict()
