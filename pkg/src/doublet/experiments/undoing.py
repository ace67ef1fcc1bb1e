"""src/doublet/experiments/undoing.py

Undoing a measurement: interact, reverse, interact again. The reversal
restores the initial state and resets the record, and the second outcome
carries no memory of the first.
"""

from __future__ import annotations

from typing import Any, Dict, List, Tuple

import numpy as np

from doublet.constants import (
    DEFAULT_EVENTS,
    DEFAULT_SEED,
    EPS_BRANCH,
    REPLAY_EVENTS,
)
from doublet.core.dual import DualEngine, EventRecord, pointer_distribution
from doublet.core.hilbert import (
    State,
    StateVector,
    expectation,
    fidelity,
    trace_distance,
)
from doublet.core.model import (
    InputKind,
    MeasurementScenario,
    StepKind,
    build_initial_state,
    system_coherence_observable,
)
from doublet.experiments import (
    GedankenExperiment,
    exact_verdict,
    frequency_summaries,
    monte_carlo_verdict,
    outcome_array,
    replay_verdict,
    require_observers,
    require_pattern,
)
from doublet.experiments.report import ExperimentReport, Summary, Verdict


def _collapsed_then_erased(scenario: MeasurementScenario) -> State:
    """``Σ |a_i|² |s_i><s_i|`` with every observer ready."""
    return build_initial_state(scenario.replace(input_kind=InputKind.MIXED))


class Experiment(GedankenExperiment):
    """Measurement, reversal and re-measurement by one observer."""

    __slots__ = ()

    name = "undoing"

    def validate(self, scenario: MeasurementScenario) -> None:
        require_observers(scenario, 1, self.name)
        label = scenario.observers[0].label
        require_pattern(
            scenario,
            (("interact", label), ("reverse", label), ("interact", label)),
            self.name,
        )

    # pylint: disable=too-many-locals
    def evaluate(
        self,
        scenario: MeasurementScenario,
        engine: DualEngine,
        records: Tuple[EventRecord, ...],
    ) -> Tuple[List[Summary], List[Verdict], Dict[str, Any]]:
        observer = scenario.observers[0]
        label = observer.label
        first_step, second_step = [
            c for c in engine.compiled if c.step.kind is StepKind.INTERACT
        ]
        reverse_step = next(
            c for c in engine.compiled if c.step.kind is StepKind.REVERSE
        )

        initial = engine.initial.dynamical
        reversed_state = engine.dynamical_after(reverse_step.index + 1)
        verdicts = [
            exact_verdict(
                "undoing.restored",
                label,
                0.0,
                trace_distance(initial, reversed_state),
                EPS_BRANCH,
            )
        ]

        at_reverse = outcome_array(records, label, reverse_step.step_id)
        events = len(records)
        verdicts.append(
            exact_verdict(
                "undoing.ready_record",
                label,
                1.0,
                float(np.count_nonzero(at_reverse == 0)) / events,
                0.0,
            )
        )

        first = outcome_array(records, label, first_step.step_id)
        second = outcome_array(records, label, second_step.step_id)
        p_first = pointer_distribution(
            engine.dynamical_after(first_step.index + 1), observer
        )
        p_second = pointer_distribution(
            engine.dynamical_after(second_step.index + 1), observer
        )
        for i in range(1, observer.dimension):
            for j in range(1, observer.dimension):
                hits = int(np.count_nonzero((first == i) & (second == j)))
                verdicts.append(
                    monte_carlo_verdict(
                        "undoing.independence",
                        f"({i},{j})",
                        p_first[i] * p_second[j],
                        hits,
                        events,
                    )
                )

        details: Dict[str, Any] = {}
        if isinstance(initial, StateVector) and isinstance(reversed_state, StateVector):
            details["fidelity"] = fidelity(initial, reversed_state)
        if scenario.is_binary:
            coherence = system_coherence_observable(scenario)
            restored = expectation(reversed_state, coherence)
            dual_prediction = expectation(initial, coherence)
            erased = expectation(_collapsed_then_erased(scenario), coherence)
            verdicts.append(
                exact_verdict(
                    "undoing.system_coherence",
                    label,
                    dual_prediction,
                    restored,
                    EPS_BRANCH,
                )
            )
            details["system_coherence"] = {
                "measured": restored,
                "dual_prediction": dual_prediction,
                "collapse_then_erase": erased,
                "distinguishable": abs(dual_prediction - erased) > EPS_BRANCH,
            }
        verdicts.append(replay_verdict(engine, records, REPLAY_EVENTS))

        summaries = frequency_summaries(observer, first, "first") + frequency_summaries(
            observer, second, "second"
        )
        return summaries, verdicts, details


def run_undoing(
    scenario: MeasurementScenario,
    events: int = DEFAULT_EVENTS,
    master_seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> ExperimentReport:
    """
    Run interact, reverse, interact over ``events`` events.

    Raises:
        UnsupportedScenarioError: Unless the scenario has one observer and its
            schedule is interact, reverse, interact (free steps allowed).
    """
    return Experiment().run(scenario, events, master_seed, workers)
