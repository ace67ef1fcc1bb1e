"""tests/unit/test_interface.py"""

import numpy as np
import pytest

from doublet.core.dual import DualEngine, OutcomeDistribution
from doublet.errors import ArgumentError, ScenarioError
from doublet.interface import Doublet
from doublet.scenario_format import scenario_to_dict
from tests.scenarios import SCENARIO_YAML

# ==== INIT ====


def test_init_from_every_input(binary_scenario, scenario_file):
    expected = Doublet(binary_scenario)
    assert Doublet(scenario_file) == expected
    assert Doublet(str(scenario_file)) == expected
    assert Doublet(SCENARIO_YAML) == expected
    assert Doublet(scenario_to_dict(binary_scenario)) == expected
    assert Doublet(expected) == expected


@pytest.mark.parametrize("value", [42, None, 1.5, ["schema", 1]])
def test_init_rejects_other_types(value):
    with pytest.raises(ArgumentError, match="Cannot build a scenario"):
        Doublet(value)


def test_init_reports_invalid_documents():
    with pytest.raises(ScenarioError):
        Doublet(SCENARIO_YAML.replace("[0.6, 0.8]", "[0.6, 0.6]"))


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_init_rejects_bad_seeds(binary_scenario, seed):
    with pytest.raises(ValueError):
        Doublet(binary_scenario, seed)


def test_long_single_line_text_is_parsed_not_opened():
    with pytest.raises(ScenarioError):
        Doublet("x" * 5000)


# ==== REPRESENTATION & COMPARISON ====


def test_repr(binary_scenario):
    assert repr(Doublet(binary_scenario, 7)) == (
        "Doublet(scenario='standard', dimension=6, seed=7)"
    )


def test_equality_includes_seed(binary_scenario):
    doublet = Doublet(binary_scenario)
    assert doublet == Doublet(binary_scenario)
    assert doublet != doublet.with_seed(1)
    assert doublet.with_seed(1).seed == 1
    assert doublet != "standard"


def test_unhashable(binary_scenario):
    with pytest.raises(TypeError):
        hash(Doublet(binary_scenario))


# ==== STATES ====


def test_engine_is_built_once(binary_scenario):
    doublet = Doublet(binary_scenario)
    assert isinstance(doublet.engine, DualEngine)
    assert doublet.engine is doublet.engine


def test_initial_and_final_state(binary_scenario):
    doublet = Doublet(binary_scenario)
    assert doublet.initial_state().outcome_indices() == {"O": 0}
    amplitudes = doublet.final_state().amplitudes
    assert np.allclose(amplitudes, [0, 0.6, 0, 0, 0, 0.8])


def test_distribution_by_step(binary_scenario):
    doublet = Doublet(binary_scenario)
    assert isinstance(doublet.distribution(), OutcomeDistribution)
    assert doublet.distribution(after=0).ready == 1.0
    assert doublet.distribution("O", after=1).allclose([0.0, 0.36, 0.64])
    with pytest.raises(ArgumentError):
        doublet.distribution(after=2)
    with pytest.raises(ArgumentError):
        doublet.distribution("P")


def test_statistical_and_restricted_states(two_observer_scenario):
    doublet = Doublet(two_observer_scenario)
    stat = doublet.statistical_state(after=1)
    assert stat.distribution("O").allclose([0.0, 0.36, 0.64])
    assert stat.distribution("P").ready == pytest.approx(1.0)
    restricted = doublet.restricted_state("P")
    assert np.allclose(restricted.entries, np.diag([0.0, 0.36, 0.64]))


def test_event_restricted_state_is_a_pointer_projector(binary_scenario):
    doublet = Doublet(binary_scenario)
    index = doublet.event(3).records["O"]
    projector = doublet.event_restricted_state(3)
    assert projector.diagonal().tolist() == [
        1.0 if j == index else 0.0 for j in range(3)
    ]


# ==== EVENTS ====


def test_events_and_replay(binary_scenario):
    doublet = Doublet(binary_scenario, seed=5)
    records = doublet.events(4, start=2)
    assert [r.event_index for r in records] == [2, 3, 4, 5]
    assert doublet.replay(3)[0] == records[1]
    assert doublet.event(2) == records[0]


def test_run_experiment(binary_scenario):
    report = Doublet(binary_scenario).run("collapse", events=2000)
    assert report.experiment == "collapse"
    assert report.events == 2000
    with pytest.raises(ArgumentError):
        Doublet(binary_scenario).run("telepathy")


def test_expand(binary_scenario):
    expanded = Doublet(binary_scenario).expand(3)
    assert expanded.layout.total_dimension == 54
    assert expanded.distribution().allclose([0.0, 0.36, 0.64])


# ==== EXPORT ====


def test_dump_and_digest(binary_scenario):
    doublet = Doublet(binary_scenario)
    assert Doublet(doublet.dump()) == doublet
    assert len(doublet.digest) == 64


def test_for_json(binary_scenario):
    data = Doublet(binary_scenario, 9).for_json()
    assert set(data) == {"scenario", "digest", "seed"}
    assert data["seed"] == 9
    assert data["scenario"]["name"] == "standard"


def test_available_experiments():
    assert "collapse" in Doublet.available_experiments()
