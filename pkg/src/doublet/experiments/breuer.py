"""src/doublet/experiments/breuer.py

Self-measurement restriction: pure and mixed inputs leave the observer with
the same restricted state, while every single event's restricted state is a
pointer projector that differs from it.
"""

from __future__ import annotations

from typing import Any, Dict, List, Tuple

import numpy as np

from doublet.constants import (
    DEFAULT_EVENTS,
    DEFAULT_SEED,
    EPS_BRANCH,
    EPS_NORM,
    EPS_ORACLE,
)
from doublet.core.dual import (
    DualEngine,
    DualState,
    EventRecord,
    PointerRecord,
    pointer_distribution,
    restricted_state_event,
    restricted_state_statistical,
)
from doublet.core.hilbert import apply_unitary, trace_distance
from doublet.core.model import (
    InputKind,
    MeasurementScenario,
    build_initial_state,
    build_premeasurement_unitary,
)
from doublet.errors import UnsupportedScenarioError
from doublet.experiments import (
    GedankenExperiment,
    exact_verdict,
    first_interaction,
    frequency_summaries,
    outcome_array,
    require_observers,
)
from doublet.experiments.report import ExperimentReport, Summary, Verdict


class Experiment(GedankenExperiment):
    """Statistical versus per-event restricted states of one observer."""

    __slots__ = ()

    name = "breuer"

    def validate(self, scenario: MeasurementScenario) -> None:
        require_observers(scenario, 1, self.name)
        if int(np.count_nonzero(scenario.weights > EPS_NORM)) < 2:
            raise UnsupportedScenarioError(
                f"{self.name} needs at least two nonzero amplitudes"
            )
        interacts = ("interact", scenario.observers[0].label)
        if interacts not in scenario.schedule.pattern():
            raise UnsupportedScenarioError(f"{self.name} needs an interact step")

    # pylint: disable=too-many-locals
    def evaluate(
        self,
        scenario: MeasurementScenario,
        engine: DualEngine,
        records: Tuple[EventRecord, ...],
    ) -> Tuple[List[Summary], List[Verdict], Dict[str, Any]]:
        observer = scenario.observers[0]
        label = observer.label
        interaction = first_interaction(engine, self.name)
        measured_state = engine.dynamical_after(interaction.index + 1)

        unitary = build_premeasurement_unitary(scenario, label)
        pure = apply_unitary(
            build_initial_state(scenario.replace(input_kind=InputKind.PURE)), unitary
        )
        mixed = apply_unitary(
            build_initial_state(scenario.replace(input_kind=InputKind.MIXED)), unitary
        )
        restricted_pure = restricted_state_statistical(pure, observer)
        restricted_mixed = restricted_state_statistical(mixed, observer)
        verdicts = [
            exact_verdict(
                "breuer.restricted_equal",
                label,
                0.0,
                trace_distance(restricted_pure, restricted_mixed),
                EPS_ORACLE,
            )
        ]

        # The per-event distance depends on the recorded index only.
        statistical = restricted_state_statistical(measured_state, observer)
        weights = pointer_distribution(measured_state, observer)
        distances = np.zeros(observer.dimension)
        for index in range(observer.dimension):
            dual = DualState(measured_state, [PointerRecord(observer, index)])
            distances[index] = trace_distance(
                restricted_state_event(dual, label), statistical
            )

        outcomes = outcome_array(records, label, interaction.step_id)
        for index in np.unique(outcomes):
            verdicts.append(
                exact_verdict(
                    "breuer.event_distance",
                    f"{label}={index}",
                    1.0 - weights[int(index)],
                    float(distances[index]),
                    EPS_BRANCH,
                )
            )
        per_event = distances[outcomes]
        differs = int(np.count_nonzero(per_event > EPS_NORM))
        verdicts.append(
            exact_verdict(
                "breuer.always_differs", label, 1.0, differs / len(records), 0.0
            )
        )

        events = len(records)
        std_error = float(per_event.std(ddof=1) / events**0.5) if events > 1 else 0.0
        summaries = [
            Summary("trace_distance", float(per_event.mean()), std_error, events)
        ] + frequency_summaries(observer, outcomes)
        details = {
            "restricted_state": np.real(np.diag(statistical.entries)).tolist(),
            "distance_by_outcome": distances.tolist(),
        }
        return summaries, verdicts, details


def run_breuer_check(
    scenario: MeasurementScenario,
    events: int = DEFAULT_EVENTS,
    master_seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> ExperimentReport:
    """
    Compare statistical and per-event restricted observer states.

    Raises:
        UnsupportedScenarioError: Unless there is one observer, an interact
            step and at least two nonzero amplitudes.
    """
    return Experiment().run(scenario, events, master_seed, workers)
