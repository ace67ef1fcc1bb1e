"""src/doublet/__init__.py

Doublet: measurement as a pair of descriptions.

Each event carries a dynamical quantum state that only ever evolves
unitarily, next to the observer's pointer record that is sampled with Born
weights. The package builds measurement scenarios, runs the events
reproducibly and checks the claims of the classic gedanken experiments
(collapse statistics, interference, undoing a measurement, two observers).
"""

from pathlib import Path
from typing import List, Union

from doublet.constants import DEFAULT_EVENTS, DEFAULT_SEED
from doublet.core.dual import DualEngine, EventRecord, OutcomeDistribution
from doublet.core.model import MeasurementScenario
from doublet.errors import (
    ArgumentError,
    DoubletError,
    ScenarioError,
    UnsupportedScenarioError,
)
from doublet.experiments import available_experiments
from doublet.experiments.report import ExperimentReport
from doublet.interface import Doublet
from doublet.scenario_format import load_scenario, parse_scenario


def run_experiment(
    scenario: Union[str, Path, MeasurementScenario],
    experiment: str,
    events: int = DEFAULT_EVENTS,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> ExperimentReport:
    """Run a named experiment on a scenario.

    Args:
        scenario: Scenario object, YAML path or YAML text
        experiment: Experiment name (see ``available_experiments``)
        events: Number of events
        seed: 64-bit master seed
        workers: Worker processes for the event loop

    Returns:
        ExperimentReport: Summaries and verdicts of the run
    """
    return Doublet(scenario, seed).run(experiment, events, workers)


def simulate_events(
    scenario: Union[str, Path, MeasurementScenario],
    events: int,
    seed: int = DEFAULT_SEED,
) -> List[EventRecord]:
    """Return the records of the first ``events`` events of a scenario.

    Args:
        scenario: Scenario object, YAML path or YAML text
        events: Number of events
        seed: 64-bit master seed

    Returns:
        List[EventRecord]: One record per event, in index order
    """
    return Doublet(scenario, seed).events(events)


def born_weights(
    scenario: Union[str, Path, MeasurementScenario], observer: str = ""
) -> OutcomeDistribution:
    """Pointer distribution after the whole schedule.

    Args:
        scenario: Scenario object, YAML path or YAML text
        observer: Observer label; the first observer when empty

    Returns:
        OutcomeDistribution: Weights over ready and outcome indices
    """
    return Doublet(scenario).distribution(observer or None)


__version__ = "0.1.0"
__all__ = [
    "Doublet",
    "DualEngine",
    "EventRecord",
    "ExperimentReport",
    "MeasurementScenario",
    "OutcomeDistribution",
    "DoubletError",
    "ArgumentError",
    "ScenarioError",
    "UnsupportedScenarioError",
    "available_experiments",
    "load_scenario",
    "parse_scenario",
    "run_experiment",
    "simulate_events",
    "born_weights",
]
