"""src/doublet/experiments/collapse.py

Collapse statistics: one observer measures S, and the records sampled over
many events reproduce the Born weights of the initial amplitudes.
"""

from __future__ import annotations

from typing import Any, Dict, List, Tuple

import numpy as np

from doublet.constants import DEFAULT_EVENTS, DEFAULT_SEED, EPS_BRANCH
from doublet.core.dual import DualEngine, EventRecord, pointer_distribution
from doublet.core.model import MeasurementScenario
from doublet.errors import UnsupportedScenarioError
from doublet.experiments import (
    GedankenExperiment,
    born_verdicts,
    exact_verdict,
    frequency_summaries,
    outcome_array,
    pointer_mean,
    require_observers,
)
from doublet.experiments.report import ExperimentReport, Summary, Verdict


class Experiment(GedankenExperiment):
    """Born statistics of a single measurement."""

    __slots__ = ()

    name = "collapse"

    def validate(self, scenario: MeasurementScenario) -> None:
        require_observers(scenario, 1, self.name)
        pattern = scenario.schedule.pattern()
        if not pattern or pattern[-1][0] != "interact":
            raise UnsupportedScenarioError(
                f"{self.name} needs a schedule ending with an interact step"
            )

    def evaluate(
        self,
        scenario: MeasurementScenario,
        engine: DualEngine,
        records: Tuple[EventRecord, ...],
    ) -> Tuple[List[Summary], List[Verdict], Dict[str, Any]]:
        observer = scenario.observers[0]
        outcomes = outcome_array(records, observer.label)
        born = scenario.weights
        final = pointer_distribution(engine.final_dynamical, observer)

        verdicts = born_verdicts("collapse.born_frequency", observer, outcomes, born)
        verdicts.extend(
            exact_verdict(
                "collapse.analytic_born",
                f"{observer.label}={j}",
                float(born[j - 1]),
                final[j],
                EPS_BRANCH,
            )
            for j in range(1, observer.dimension)
        )
        ready = int(np.count_nonzero(outcomes == 0))
        verdicts.append(
            exact_verdict(
                "collapse.no_ready", observer.label, 0.0, ready / len(records), 0.0
            )
        )
        summary, mean = pointer_mean(
            "collapse.mean_pointer", observer, outcomes, final.weights
        )
        verdicts.append(mean)

        summaries = [summary] + frequency_summaries(observer, outcomes)
        details = {
            "born_weights": [float(w) for w in born],
            "final_distribution": [float(w) for w in final.weights],
            "input": scenario.input_kind.value,
            "pointer_cells": scenario.pointer_df_count,
        }
        return summaries, verdicts, details


def run_collapse_statistics(
    scenario: MeasurementScenario,
    events: int = DEFAULT_EVENTS,
    master_seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> ExperimentReport:
    """
    Sample ``events`` single measurements and compare with ``|a_j|²``.

    Raises:
        UnsupportedScenarioError: Unless there is exactly one observer and the
            schedule ends with its interaction.
    """
    return Experiment().run(scenario, events, master_seed, workers)
