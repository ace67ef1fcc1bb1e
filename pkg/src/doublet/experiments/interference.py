"""src/doublet/experiments/interference.py

Pure/mixed discrimination through the interference observable B.
"""

from __future__ import annotations

from typing import Any, Dict, List, Tuple

import numpy as np

from doublet.constants import EPS_BRANCH, EPS_ORACLE
from doublet.core.dual import DualEngine, EventRecord
from doublet.core.hilbert import apply_unitary, expectation, trace_distance
from doublet.core.model import (
    InputKind,
    MeasurementScenario,
    build_initial_state,
    build_interference_observable,
    build_mixed_final_state,
    build_premeasurement_unitary,
)
from doublet.errors import UnsupportedScenarioError
from doublet.experiments import GedankenExperiment, complex_pair, exact_verdict
from doublet.experiments.report import ExperimentReport, Summary, Verdict


class Experiment(GedankenExperiment):
    """Analytic comparison of ``<B>`` on the entangled state and on the mixture."""

    __slots__ = ()

    name = "interference"
    uses_events = False

    def validate(self, scenario: MeasurementScenario) -> None:
        if not scenario.is_binary:
            raise UnsupportedScenarioError(
                f"{self.name} needs a binary S, got {scenario.outcome_count} levels"
            )

    def evaluate(
        self,
        scenario: MeasurementScenario,
        engine: DualEngine,
        records: Tuple[EventRecord, ...],
    ) -> Tuple[List[Summary], List[Verdict], Dict[str, Any]]:
        label = scenario.observers[0].label
        unitary = build_premeasurement_unitary(scenario, label)
        observable = build_interference_observable(scenario, label)

        pure_input = build_initial_state(scenario.replace(input_kind=InputKind.PURE))
        mixed_input = build_initial_state(scenario.replace(input_kind=InputKind.MIXED))
        pure_final = apply_unitary(pure_input, unitary)
        mixed_final = build_mixed_final_state(scenario, label)

        first, second = scenario.amplitudes
        predicted = 2.0 * float(np.real(np.conj(first) * second))
        pure_value = expectation(pure_final, observable)
        mixed_value = expectation(mixed_final, observable)
        evolved_gap = trace_distance(apply_unitary(mixed_input, unitary), mixed_final)

        verdicts = [
            exact_verdict(
                "interference.pure", label, predicted, pure_value, EPS_BRANCH
            ),
            exact_verdict("interference.mixed", label, 0.0, mixed_value, EPS_ORACLE),
            exact_verdict(
                "interference.mixed_dynamics", label, 0.0, evolved_gap, EPS_BRANCH
            ),
        ]
        details = {
            "amplitudes": [complex_pair(a) for a in scenario.amplitudes],
            "b_pure": pure_value,
            "b_mixed": mixed_value,
            "pointer_cells": scenario.pointer_df_count,
        }
        return [], verdicts, details


def run_interference_test(scenario: MeasurementScenario) -> ExperimentReport:
    """
    Evaluate ``<B>`` on the pure final state and on the outcome mixture.

    Raises:
        UnsupportedScenarioError: If S is not binary.
    """
    return Experiment().run(scenario, events=0)
