"""src/doublet/experiments/two_observer.py

Two observers measure S one after the other. Each gets its own record, the
records agree event by event, and O' sees no collapse before it interacts.
"""

from __future__ import annotations

from typing import Any, Dict, List, Tuple

import numpy as np

from doublet.constants import (
    DEFAULT_EVENTS,
    DEFAULT_SEED,
    EPS_BRANCH,
    EPS_ORACLE,
    REPLAY_EVENTS,
)
from doublet.core.dual import (
    DualEngine,
    EventRecord,
    joint_distribution,
    pointer_distribution,
    restricted_state_event,
)
from doublet.core.hilbert import State, StateVector, expectation, trace_distance
from doublet.core.model import (
    InputKind,
    MeasurementScenario,
    StepKind,
    branch_state,
    build_interference_observable,
    build_mixed_final_state,
)
from doublet.experiments import (
    GedankenExperiment,
    exact_verdict,
    frequency_summaries,
    monte_carlo_verdict,
    outcome_array,
    pointer_mean,
    replay_verdict,
    require_observers,
    require_pattern,
)
from doublet.experiments.report import ExperimentReport, Summary, Verdict


def _measured_state(scenario: MeasurementScenario) -> State:
    """The state right after the first observer interacts, O' still ready."""
    label = scenario.observers[0].label
    if scenario.input_kind is InputKind.MIXED:
        return build_mixed_final_state(scenario, label)
    total = sum(
        a * branch_state(scenario, label, i).amplitudes
        for i, a in enumerate(scenario.amplitudes, start=1)
    )
    return StateVector(total, scenario.layout)


class Experiment(GedankenExperiment):
    """Sequential measurement of S by O and then O'."""

    __slots__ = ()

    name = "two-observer"

    def validate(self, scenario: MeasurementScenario) -> None:
        require_observers(scenario, 2, self.name)
        first, second = (o.label for o in scenario.observers)
        require_pattern(
            scenario, (("interact", first), ("interact", second)), self.name
        )

    # pylint: disable=too-many-locals
    def evaluate(
        self,
        scenario: MeasurementScenario,
        engine: DualEngine,
        records: Tuple[EventRecord, ...],
    ) -> Tuple[List[Summary], List[Verdict], Dict[str, Any]]:
        first, second = scenario.observers
        interactions = [c for c in engine.compiled if c.step.kind is StepKind.INTERACT]
        first_step, second_step = interactions[0], interactions[1]
        before_second = engine.dynamical_after(second_step.index)
        final = engine.final_dynamical
        events = len(records)
        verdicts: List[Verdict] = []

        # Between the interactions: O holds an outcome, O' is still ready.
        checked = min(REPLAY_EVENTS, events)
        intermediate = 0
        for index in range(checked):
            dual = engine.replay(index)[1][second_step.index]
            ready_view = restricted_state_event(dual, second.label).entries
            if not dual.record(first.label).is_ready and ready_view[0, 0] == 1.0:
                intermediate += 1
        verdicts.append(
            exact_verdict(
                "two_observer.intermediate_ready",
                f"first {checked} events",
                1.0,
                intermediate / checked,
                0.0,
            )
        )
        supplied = scenario.interaction_hamiltonian(first.label)
        if first_step.index == 0 and supplied is None:
            verdicts.append(
                exact_verdict(
                    "two_observer.pre_second_state",
                    first.label,
                    0.0,
                    trace_distance(
                        engine.dynamical_after(1), _measured_state(scenario)
                    ),
                    EPS_BRANCH,
                )
            )
        details: Dict[str, Any] = {}
        if scenario.is_binary:
            observable = build_interference_observable(scenario, first.label)
            a1, a2 = scenario.amplitudes
            predicted = 2.0 * float(np.real(np.conj(a1) * a2))
            measured = expectation(before_second, observable)
            verdicts.append(
                exact_verdict(
                    "two_observer.pre_second_interference",
                    first.label,
                    predicted,
                    measured,
                    EPS_BRANCH,
                )
            )
            if abs(predicted) > EPS_BRANCH:
                verdicts.append(
                    exact_verdict(
                        "two_observer.no_early_collapse",
                        second.label,
                        1.0,
                        float(abs(measured) > EPS_BRANCH),
                        0.0,
                    )
                )
            details["b_before_second"] = measured

        first_final = outcome_array(records, first.label)
        second_final = outcome_array(records, second.label)
        agree = int(np.count_nonzero(first_final == second_final))
        verdicts.append(
            exact_verdict(
                "two_observer.agreement",
                f"{first.label}={second.label}",
                1.0,
                agree / events,
                0.0,
            )
        )
        for i in range(1, first.dimension):
            hits = int(np.count_nonzero((first_final == i) & (second_final == i)))
            verdicts.append(
                monte_carlo_verdict(
                    "two_observer.joint_frequency",
                    f"({i},{i})",
                    float(scenario.weights[i - 1]),
                    hits,
                    events,
                )
            )

        joint = joint_distribution(final, first, second)
        off_diagonal = joint - np.diag(np.diag(joint))
        verdicts.append(
            exact_verdict(
                "two_observer.joint_diagonal",
                f"{first.label}x{second.label}",
                0.0,
                float(np.max(np.abs(off_diagonal))),
                EPS_ORACLE,
            )
        )

        summaries: List[Summary] = []
        means = {}
        for observer, outcomes in ((first, first_final), (second, second_final)):
            weights = pointer_distribution(final, observer).weights
            summary, verdict = pointer_mean(
                "two_observer.mean_values", observer, outcomes, weights
            )
            summaries.append(summary)
            verdicts.append(verdict)
            means[observer.label] = verdict.claimed
            summaries.extend(frequency_summaries(observer, outcomes))
        verdicts.append(replay_verdict(engine, records, REPLAY_EVENTS))

        details["joint_distribution"] = joint.tolist()
        details["mean_values"] = means
        return summaries, verdicts, details


def run_two_observer(
    scenario: MeasurementScenario,
    events: int = DEFAULT_EVENTS,
    master_seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> ExperimentReport:
    """
    Run O's then O''s interaction over ``events`` events.

    Raises:
        UnsupportedScenarioError: Unless the scenario has two observers and
            interacts with the first, then the second.
    """
    return Experiment().run(scenario, events, master_seed, workers)
