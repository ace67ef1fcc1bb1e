"""src/doublet/experiments/__init__.py"""

from __future__ import annotations

import logging
from functools import lru_cache
from importlib import import_module
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type

import numpy as np
from numpy.typing import NDArray

from doublet.constants import (
    DEFAULT_EVENTS,
    DEFAULT_SEED,
    EPS_ORACLE,
    MONTE_CARLO_SIGMAS,
    binomial_sigma,
)
from doublet.core.dual import CompiledStep, DualEngine, EventRecord
from doublet.core.model import MeasurementScenario, Observer, StepKind
from doublet.errors import ArgumentError, UnsupportedScenarioError
from doublet.experiments.report import ExperimentReport, Summary, Verdict
from doublet.scenario_format import scenario_digest

logger = logging.getLogger(__name__)


class GedankenExperiment:
    """Base class for experiments run against a scenario.

    Subclasses set ``name``, implement ``evaluate`` and may override
    ``validate``. Analytic experiments set ``uses_events = False``.
    """

    __slots__ = ()

    name: str = ""
    uses_events: bool = True

    def validate(self, scenario: MeasurementScenario) -> None:
        """Reject scenarios the experiment cannot run.

        Raises:
            UnsupportedScenarioError: If the scenario has the wrong shape.
        """

    def prepare(self, scenario: MeasurementScenario) -> MeasurementScenario:
        """Return the scenario actually simulated (the input by default)."""
        return scenario

    def evaluate(
        self,
        scenario: MeasurementScenario,
        engine: DualEngine,
        records: Tuple[EventRecord, ...],
    ) -> Tuple[List[Summary], List[Verdict], Dict[str, Any]]:
        """Turn the simulated events into summaries, verdicts and details."""
        raise NotImplementedError

    def run(
        self,
        scenario: MeasurementScenario,
        events: int = DEFAULT_EVENTS,
        master_seed: int = DEFAULT_SEED,
        workers: int = 1,
    ) -> ExperimentReport:
        """
        Run the experiment.

        Args:
            scenario (MeasurementScenario): Scenario to simulate.
            events (int): Number of events (ignored by analytic experiments).
            master_seed (int): 64-bit master seed.
            workers (int): Worker processes for the event loop.

        Returns:
            ExperimentReport: Summaries and verdicts of the run.

        Raises:
            ArgumentError: If ``events < 1`` for an event-driven experiment.
            UnsupportedScenarioError: If the scenario has the wrong shape.
        """
        if self.uses_events and (isinstance(events, bool) or events < 1):
            raise ArgumentError(f"{self.name} needs at least one event, got {events}")
        self.validate(scenario)
        simulated = self.prepare(scenario)
        count = events if self.uses_events else 0
        logger.info(
            "Running %s on %r: %d events, seed %d",
            self.name,
            scenario.name,
            count,
            master_seed,
        )

        engine = DualEngine(simulated, master_seed)
        records = tuple(engine.run(count, workers=workers))
        summaries, verdicts, details = self.evaluate(simulated, engine, records)
        report = ExperimentReport(
            experiment=self.name,
            scenario_name=scenario.name,
            scenario_digest=scenario_digest(scenario),
            events=count,
            master_seed=master_seed,
            summaries=tuple(summaries),
            verdicts=tuple(verdicts),
            details=details,
            records=records,
        )
        logger.info(
            "%s finished: %d of %d verdicts passed",
            self.name,
            len(report.verdicts) - len(report.failures),
            len(report.verdicts),
        )
        for failure in report.failures:
            logger.warning(
                "%s failed %s[%s]: claimed %r, measured %r, tolerance %r",
                self.name,
                failure.claim,
                failure.subject,
                failure.claimed,
                failure.measured,
                failure.tolerance,
            )
        return report


# --- Helpers shared by the experiments ---


def require_observers(scenario: MeasurementScenario, count: int, who: str) -> None:
    """Raise unless the scenario has exactly ``count`` observers."""
    if len(scenario.observers) != count:
        raise UnsupportedScenarioError(
            f"{who} needs {count} observer(s), got {len(scenario.observers)}"
        )


def require_pattern(
    scenario: MeasurementScenario,
    pattern: Sequence[Tuple[str, Optional[str]]],
    who: str,
) -> None:
    """Raise unless the non-free steps are exactly ``pattern``."""
    actual = scenario.schedule.pattern()
    if actual != tuple(pattern):
        raise UnsupportedScenarioError(
            f"{who} needs schedule {list(pattern)}, got {list(actual)}"
        )


def step_positions(engine: DualEngine, kind: StepKind) -> List[int]:
    """Positions of the compiled steps of ``kind``, in order."""
    return [c.index for c in engine.compiled if c.step.kind is kind]


def first_interaction(engine: DualEngine, who: str) -> CompiledStep:
    """The first compiled interact step.

    Raises:
        UnsupportedScenarioError: If the schedule never interacts.
    """
    for compiled in engine.compiled:
        if compiled.step.kind is StepKind.INTERACT:
            return compiled
    raise UnsupportedScenarioError(f"{who} needs at least one interact step")


def outcome_array(
    records: Sequence[EventRecord], observer: str, step_id: str = ""
) -> NDArray[np.int64]:
    """Indices of ``observer`` per event.

    Final records by default, or the indices drawn at ``step_id``.
    """
    if step_id:
        values = (r.outcome(step_id, observer) for r in records)
    else:
        values = (r.records[observer] for r in records)
    return np.fromiter(values, dtype=np.int64, count=len(records))


def monte_carlo_verdict(
    claim: str,
    subject: str,
    probability: float,
    hits: int,
    events: int,
) -> Verdict:
    """Compare a frequency with a probability, ``MONTE_CARLO_SIGMAS`` wide."""
    sigma = binomial_sigma(probability, events)
    return Verdict(
        claim,
        subject,
        claimed=float(probability),
        measured=hits / events,
        tolerance=MONTE_CARLO_SIGMAS * sigma,
        sigma=sigma,
    )


def born_verdicts(
    claim: str,
    observer: Observer,
    outcomes: NDArray[np.int64],
    weights: Sequence[float],
) -> List[Verdict]:
    """One frequency verdict per outcome ``j >= 1`` of ``observer``."""
    events = int(outcomes.shape[0])
    counts = np.bincount(outcomes, minlength=observer.dimension)
    return [
        monte_carlo_verdict(
            claim,
            f"{observer.label}={j}",
            float(weights[j - 1]),
            int(counts[j]),
            events,
        )
        for j in range(1, observer.dimension)
    ]


def pointer_mean(
    claim: str,
    observer: Observer,
    outcomes: NDArray[np.int64],
    probabilities: Sequence[float],
) -> Tuple[Summary, Verdict]:
    """Compare the event mean of ``q^O`` with its ensemble expectation.

    ``probabilities`` covers every pointer index, ready included.
    """
    values = np.array([observer.eigenvalue(j) for j in range(observer.dimension)])
    samples = values[outcomes]
    events = int(samples.shape[0])
    expected = float(np.dot(probabilities, values))
    variance = max(float(np.dot(probabilities, values**2)) - expected**2, 0.0)
    sigma = (variance / events) ** 0.5
    mean = float(samples.mean())
    std_error = float(samples.std(ddof=1) / events**0.5) if events > 1 else 0.0
    summary = Summary(f"q.{observer.label}", mean, std_error, events)
    verdict = Verdict(
        claim,
        observer.label,
        claimed=expected,
        measured=mean,
        tolerance=max(MONTE_CARLO_SIGMAS * sigma, EPS_ORACLE),
        sigma=sigma,
    )
    return summary, verdict


def frequency_summaries(
    observer: Observer, outcomes: NDArray[np.int64], prefix: str = "freq"
) -> List[Summary]:
    """Frequency of each pointer index as a summary with its binomial error."""
    events = int(outcomes.shape[0])
    counts = np.bincount(outcomes, minlength=observer.dimension)
    summaries = []
    for j in range(observer.dimension):
        share = float(counts[j]) / events
        summaries.append(
            Summary(
                f"{prefix}.{observer.label}={j}",
                share,
                binomial_sigma(share, events),
                events,
            )
        )
    return summaries


def replay_verdict(
    engine: DualEngine, records: Sequence[EventRecord], limit: int
) -> Verdict:
    """Check the first ``limit`` events against a step-by-step replay."""
    checked = min(limit, len(records))
    matching = sum(engine.replay(i)[0] == records[i] for i in range(checked))
    return Verdict(
        "replay.consistent",
        f"first {checked} events",
        claimed=1.0,
        measured=matching / checked if checked else 1.0,
        tolerance=0.0,
    )


def exact_verdict(
    claim: str, subject: str, claimed: float, measured: float, tolerance: float
) -> Verdict:
    """Analytic verdict with a fixed tolerance."""
    return Verdict(claim, subject, float(claimed), float(measured), tolerance)


def complex_pair(value: complex) -> List[float]:
    """``[re, im]`` form used in report details."""
    return [float(value.real), float(value.imag)]


# --- Registry ---

_EXPERIMENT_MAP: Dict[str, str] = {
    "collapse": "doublet.experiments.collapse",
    "interference": "doublet.experiments.interference",
    "undoing": "doublet.experiments.undoing",
    "two-observer": "doublet.experiments.two_observer",
    "breuer": "doublet.experiments.breuer",
    "classical": "doublet.experiments.classical",
}

_CUSTOM_EXPERIMENTS: Dict[str, GedankenExperiment] = {}


@lru_cache(maxsize=None)
def get_experiment(name: str) -> GedankenExperiment:
    """Get an experiment by name. Lazy import.

    Args:
        name: Experiment identifier (e.g., "collapse").

    Returns:
        GedankenExperiment instance.

    Raises:
        ArgumentError: If the name is not registered.
    """
    if name in _CUSTOM_EXPERIMENTS:
        return _CUSTOM_EXPERIMENTS[name]

    module_path = _EXPERIMENT_MAP.get(name)
    if module_path is None:
        raise ArgumentError(
            f"Unknown experiment {name!r}; choose from {available_experiments()}"
        )

    module = import_module(module_path)
    experiment_class: Type[GedankenExperiment] = getattr(module, "Experiment")
    return experiment_class()


def register_experiment(
    name: str, experiment_class: Type[GedankenExperiment]
) -> None:
    """Register a custom experiment.

    Args:
        name: Identifier used by ``get_experiment`` and the CLI.
        experiment_class: GedankenExperiment subclass.
    """
    _CUSTOM_EXPERIMENTS[name] = experiment_class()
    get_experiment.cache_clear()


def available_experiments() -> List[str]:
    """Return the sorted names of every registered experiment."""
    return sorted(set(_EXPERIMENT_MAP) | set(_CUSTOM_EXPERIMENTS))


