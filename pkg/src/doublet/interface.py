"""src/doublet/interface.py"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from doublet.constants import DEFAULT_EVENTS, DEFAULT_SEED, validate_seed
from doublet.core.dual import (
    DualEngine,
    DualState,
    EventRecord,
    OutcomeDistribution,
    StatisticalDualState,
    pointer_distribution,
    restricted_state_event,
    restricted_state_statistical,
    statistical_dual_state,
)
from doublet.core.hilbert import DensityMatrix, State, SubsystemLayout
from doublet.core.model import MeasurementScenario, Observer, expand_pointer_dfs
from doublet.errors import ArgumentError
from doublet.experiments import available_experiments, get_experiment
from doublet.experiments.report import ExperimentReport
from doublet.scenario_format import (
    dump_scenario,
    load_scenario,
    parse_scenario,
    scenario_digest,
    scenario_from_dict,
    scenario_to_dict,
)

DoubletLike = Union[str, Path, Mapping[str, Any], MeasurementScenario, "Doublet"]


def _names_file(text: str) -> bool:
    if "\n" in text:
        return False
    try:
        return Path(text).is_file()
    except OSError:
        return False


class Doublet:
    """
    Entry point for running a measurement scenario.

    Wraps a validated scenario and a master seed, and hands out the pieces of
    the dual description: the dynamical state, pointer distributions,
    restricted states, single events and whole experiments. The engine is
    built on first use and reused afterwards.
    """

    __slots__ = ("_scenario", "_seed", "_engine")

    def __init__(self, scenario: DoubletLike, seed: int = DEFAULT_SEED) -> None:
        """
        Initialize a Doublet instance.

        Args:
            scenario (DoubletLike): A MeasurementScenario, another Doublet, a
                scenario mapping, a path to a YAML file, or YAML text. A string
                naming an existing file is loaded; any other string is parsed.
            seed (int): 64-bit master seed for event sampling.

        Raises:
            ScenarioError: If the scenario document is invalid.
            ArgumentError: If the seed is out of range or the input type is
                not supported.
        """
        self._seed = validate_seed(seed)
        self._engine: Optional[DualEngine] = None

        if isinstance(scenario, MeasurementScenario):
            self._scenario = scenario
        elif isinstance(scenario, Doublet):
            self._scenario = scenario.scenario
        elif isinstance(scenario, Path):
            self._scenario = load_scenario(scenario)
        elif isinstance(scenario, str):
            if _names_file(scenario):
                self._scenario = load_scenario(scenario)
            else:
                self._scenario = parse_scenario(scenario)
        elif isinstance(scenario, Mapping):
            self._scenario = scenario_from_dict(scenario)
        else:
            raise ArgumentError(
                f"Cannot build a scenario from {type(scenario).__name__}"
            )

    def __repr__(self) -> str:
        """Return a debug-friendly representation."""
        return (
            f"Doublet(scenario={self._scenario.name!r}, "
            f"dimension={self.layout.total_dimension}, seed={self._seed})"
        )

    def __eq__(self, other: object) -> bool:
        """Two instances are equal when scenario and seed match."""
        if not isinstance(other, Doublet):
            return NotImplemented
        return self._scenario == other._scenario and self._seed == other._seed

    __hash__ = None  # type: ignore[assignment]

    @property
    def scenario(self) -> MeasurementScenario:
        return self._scenario

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def layout(self) -> SubsystemLayout:
        return self._scenario.layout

    @property
    def digest(self) -> str:
        """SHA-256 of the canonical scenario document."""
        return scenario_digest(self._scenario)

    @property
    def engine(self) -> DualEngine:
        """Engine for this scenario and seed, built on first access."""
        if self._engine is None:
            self._engine = DualEngine(self._scenario, self._seed)
        return self._engine

    def with_seed(self, seed: int) -> Doublet:
        """Return a copy that samples with another master seed."""
        return Doublet(self._scenario, seed)

    def expand(self, cells: int) -> Doublet:
        """Return a copy whose pointers span ``cells`` degrees of freedom each."""
        return Doublet(expand_pointer_dfs(self._scenario, cells), self._seed)

    def _observer(self, label: Optional[str]) -> Observer:
        if label is None:
            return self._scenario.observers[0]
        return self._scenario.observer(label)

    def _state(self, after: Optional[int]) -> State:
        if after is None:
            return self.engine.final_dynamical
        if not 0 <= after <= len(self.engine.compiled):
            raise ArgumentError(
                f"Step position must be in 0..{len(self.engine.compiled)}, got {after}"
            )
        return self.engine.dynamical_after(after)

    def initial_state(self) -> DualState:
        """Return the dual state before the first step, every observer ready."""
        return self.engine.initial

    def final_state(self) -> State:
        """Return the dynamical state after the whole schedule."""
        return self.engine.final_dynamical

    def distribution(
        self, observer: Optional[str] = None, after: Optional[int] = None
    ) -> OutcomeDistribution:
        """
        Return an observer's pointer distribution.

        Args:
            observer (Optional[str]): Observer label; the first one by default.
            after (Optional[int]): Number of schedule steps applied; the whole
                schedule by default.
        """
        return pointer_distribution(self._state(after), self._observer(observer))

    def statistical_state(self, after: Optional[int] = None) -> StatisticalDualState:
        """Return the dynamical state with every observer's distribution."""
        return statistical_dual_state(self._state(after), self._scenario.observers)

    def restricted_state(
        self, observer: Optional[str] = None, after: Optional[int] = None
    ) -> DensityMatrix:
        """Return the observer's reduced density matrix of the dynamical state."""
        return restricted_state_statistical(
            self._state(after), self._observer(observer)
        )

    def event_restricted_state(
        self, index: int, observer: Optional[str] = None
    ) -> DensityMatrix:
        """Return the per-event restricted state: the recorded pointer projector."""
        _, duals = self.engine.replay(index)
        return restricted_state_event(duals[-1], self._observer(observer).label)

    def event(self, index: int) -> EventRecord:
        """Return the record of one event."""
        return self.engine.event(index)

    def replay(self, index: int) -> Tuple[EventRecord, Tuple[DualState, ...]]:
        """Re-run one event step by step, returning the dual state after each."""
        return self.engine.replay(index)

    def events(self, count: int, start: int = 0, workers: int = 1) -> List[EventRecord]:
        """Return the records of events ``start .. start + count - 1``."""
        return self.engine.run(count, start=start, workers=workers)

    def run(
        self,
        experiment: str,
        events: int = DEFAULT_EVENTS,
        workers: int = 1,
    ) -> ExperimentReport:
        """
        Run a registered experiment on this scenario.

        Args:
            experiment (str): Experiment name, see ``available_experiments``.
            events (int): Number of events.
            workers (int): Worker processes for the event loop.

        Raises:
            ArgumentError: If the experiment is unknown.
            UnsupportedScenarioError: If the scenario does not fit it.
        """
        return get_experiment(experiment).run(
            self._scenario, events, self._seed, workers
        )

    def dump(self) -> str:
        """Return the scenario as a YAML document."""
        return dump_scenario(self._scenario)

    def for_json(self) -> Dict[str, Any]:
        """Return a JSON-ready mapping of the scenario, digest and seed."""
        return {
            "scenario": scenario_to_dict(self._scenario),
            "digest": self.digest,
            "seed": self._seed,
        }

    @staticmethod
    def available_experiments() -> List[str]:
        """Return the names of every registered experiment."""
        return available_experiments()
