"""src/doublet/experiments/classical.py

Classical warm-up: S enters as the Born mixture, so the ensemble is a
diagonal density matrix paired with a pointer record, and nothing quantum
ever shows up in it.
"""

from __future__ import annotations

from typing import Any, Dict, List, Tuple

import numpy as np

from doublet.constants import DEFAULT_EVENTS, DEFAULT_SEED, EPS_ORACLE
from doublet.core.dual import DualEngine, EventRecord
from doublet.core.hilbert import DensityMatrix, expectation
from doublet.core.model import (
    InputKind,
    MeasurementScenario,
    build_interference_observable,
)
from doublet.errors import UnsupportedScenarioError
from doublet.experiments import (
    GedankenExperiment,
    born_verdicts,
    exact_verdict,
    frequency_summaries,
    outcome_array,
)
from doublet.experiments.report import ExperimentReport, Summary, Verdict


def _largest_coherence(state: DensityMatrix) -> float:
    entries = state.entries
    return float(np.max(np.abs(entries - np.diag(np.diag(entries)))))


class Experiment(GedankenExperiment):
    """The dual formalism applied to a classical ensemble."""

    __slots__ = ()

    name = "classical"

    def validate(self, scenario: MeasurementScenario) -> None:
        if scenario.s_final_map is not None:
            raise UnsupportedScenarioError(
                f"{self.name} needs S to stay in its measured basis (no final_map)"
            )
        pattern = scenario.schedule.pattern()
        if not pattern or pattern[-1][0] != "interact":
            raise UnsupportedScenarioError(
                f"{self.name} needs a schedule ending with an interact step"
            )

    def prepare(self, scenario: MeasurementScenario) -> MeasurementScenario:
        return scenario.replace(input_kind=InputKind.MIXED)

    def evaluate(
        self,
        scenario: MeasurementScenario,
        engine: DualEngine,
        records: Tuple[EventRecord, ...],
    ) -> Tuple[List[Summary], List[Verdict], Dict[str, Any]]:
        coherences = []
        for position in range(len(engine.compiled) + 1):
            state = engine.dynamical_after(position)
            if isinstance(state, DensityMatrix):
                coherences.append(_largest_coherence(state))
        verdicts = [
            exact_verdict(
                "classical.diagonal", "trajectory", 0.0, max(coherences), EPS_ORACLE
            )
        ]

        details: Dict[str, Any] = {"steps": len(engine.compiled)}
        last_interacting = scenario.schedule.pattern()[-1][1] or ""
        observer = scenario.observer(last_interacting)
        if scenario.is_binary:
            value = expectation(
                engine.final_dynamical,
                build_interference_observable(scenario, observer.label),
            )
            verdicts.append(
                exact_verdict(
                    "classical.interference", observer.label, 0.0, value, EPS_ORACLE
                )
            )
            details["b_mean"] = value

        outcomes = outcome_array(records, observer.label)
        verdicts.extend(
            born_verdicts(
                "classical.born_frequency", observer, outcomes, scenario.weights
            )
        )
        return frequency_summaries(observer, outcomes), verdicts, details


def run_classical_ensemble(
    scenario: MeasurementScenario,
    events: int = DEFAULT_EVENTS,
    master_seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> ExperimentReport:
    """
    Run the scenario with S prepared as the classical Born mixture.

    Raises:
        UnsupportedScenarioError: If the scenario maps S to another final
            basis or does not end with an interact step.
    """
    return Experiment().run(scenario, events, master_seed, workers)
