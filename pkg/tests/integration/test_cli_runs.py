"""tests/integration/test_cli_runs.py"""

import json

import pytest
import yaml

from doublet.cli import main
from doublet.experiments import (
    _CUSTOM_EXPERIMENTS,
    GedankenExperiment,
    exact_verdict,
    get_experiment,
    register_experiment,
)


class FailingExperiment(GedankenExperiment):
    """Claims an interference term that the events never show."""

    name = "failing"

    def evaluate(self, scenario, engine, records):
        verdict = exact_verdict("interference.mixed", "B", 0.0, 1.0, 1e-9)
        return [], [verdict], {}


@pytest.fixture
def failing():
    register_experiment("failing", FailingExperiment)
    yield
    _CUSTOM_EXPERIMENTS.pop("failing", None)
    get_experiment.cache_clear()


def _run(scenario_file, out, *extra):
    return main([str(scenario_file), "collapse", "--out", str(out), *extra])


def test_successful_run_writes_report_and_log(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert _run(scenario_file, out, "--events", "2000") == 0
    report = yaml.safe_load((out / "collapse-report.yaml").read_text())
    assert report["experiment"] == "collapse"
    assert report["events"] == 2000
    assert report["seed"] == 42
    assert report["passed"] is True
    assert (out / "doublet.log").read_text(encoding="utf-8")
    assert not (out / "collapse-events.jsonl").exists()


def test_json_report_and_event_log(scenario_file, tmp_path):
    out = tmp_path / "out"
    code = _run(
        scenario_file, out, "--events", "50", "--format", "json", "--emit-events"
    )
    assert code == 0
    report = json.loads((out / "collapse-report.json").read_text())
    assert report["scenario"]["name"] == "standard"
    lines = (out / "collapse-events.jsonl").read_text().splitlines()
    assert len(lines) == 50
    first = json.loads(lines[0])
    assert first["event_index"] == 0
    assert first["records"]["O"] in (1, 2)


def test_runs_are_byte_identical(scenario_file, tmp_path):
    for name in ("a", "b"):
        assert (
            _run(scenario_file, tmp_path / name, "--events", "300", "--emit-events")
            == 0
        )
    for produced in ("collapse-events.jsonl", "collapse-report.yaml"):
        first = (tmp_path / "a" / produced).read_bytes()
        assert first == (tmp_path / "b" / produced).read_bytes()


def test_seed_changes_the_event_log(scenario_file, tmp_path):
    _run(scenario_file, tmp_path / "a", "--events", "100", "--emit-events")
    _run(
        scenario_file,
        tmp_path / "b",
        "--events",
        "100",
        "--emit-events",
        "--seed",
        "43",
    )
    first = (tmp_path / "a" / "collapse-events.jsonl").read_bytes()
    assert first != (tmp_path / "b" / "collapse-events.jsonl").read_bytes()


def test_seed_from_environment(scenario_file, tmp_path, monkeypatch):
    monkeypatch.setenv("DOUBLET_SEED", "99")
    monkeypatch.setenv("DOUBLET_OUT", str(tmp_path / "env"))
    assert main([str(scenario_file), "collapse", "--events", "10"]) == 0
    report = yaml.safe_load((tmp_path / "env" / "collapse-report.yaml").read_text())
    assert report["seed"] == 99


def test_failed_claim_exits_2(scenario_file, tmp_path, failing):
    out = tmp_path / "out"
    argv = [str(scenario_file), "failing", "--events", "5", "--out", str(out)]
    assert main(argv) == 2
    report = yaml.safe_load((out / "failing-report.yaml").read_text())
    assert report["passed"] is False


@pytest.mark.parametrize(
    "argv",
    [
        ["missing.yaml", "collapse"],
        ["{scenario}", "telepathy"],
        ["{scenario}", "collapse", "--events", "0"],
        ["{scenario}", "two-observer"],
    ],
)
def test_input_errors_exit_1(scenario_file, tmp_path, argv):
    args = [a.format(scenario=scenario_file) for a in argv]
    assert main(args + ["--out", str(tmp_path / "out")]) == 1


def test_invalid_scenario_exits_1(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("schema: 1\nsystem: {amplitudes: [0.6, 0.6]}\n")
    assert main([str(path), "collapse", "--out", str(tmp_path / "out")]) == 1


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    assert "doublet" in capsys.readouterr().out
