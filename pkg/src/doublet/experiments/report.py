"""src/doublet/experiments/report.py"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from doublet.constants import SCHEMA_VERSION
from doublet.core.dual import EventRecord
from doublet.errors import ArgumentError

# Claim ids a verdict may reference, with the statement each one checks.
CLAIMS: Dict[str, str] = {
    "collapse.born_frequency": "Outcome frequencies equal |a_j|^2",
    "collapse.analytic_born": "Pointer weights after the interaction equal |a_j|^2",
    "collapse.no_ready": "No event ends with the observer still ready",
    "collapse.mean_pointer": "Mean pointer value over events equals Tr(rho Q_O)",
    "interference.pure": "<B> on the entangled final state equals 2 Re(a_1* a_2)",
    "interference.mixed": "<B> on the outcome mixture vanishes",
    "interference.mixed_dynamics": "A mixed input evolves into the outcome mixture",
    "undoing.restored": "Reversal restores the initial measuring-system state",
    "undoing.ready_record": "Reversal returns the record to ready in every event",
    "undoing.independence": "Second outcomes are independent of the first",
    "undoing.system_coherence": "S coherence after reversal equals its initial value",
    "two_observer.intermediate_ready": (
        "Between the interactions O holds an outcome while O' is ready"
    ),
    "two_observer.pre_second_interference": (
        "<B> before the second interaction equals 2 Re(a_1* a_2)"
    ),
    "two_observer.pre_second_state": (
        "Right after O interacts the state is its measurement state with O' ready"
    ),
    "two_observer.no_early_collapse": (
        "<B> before the second interaction is nonzero, so S did not collapse"
    ),
    "two_observer.agreement": "Final records of both observers agree in every event",
    "two_observer.joint_frequency": "Joint frequency of (i, i) equals |a_i|^2",
    "two_observer.joint_diagonal": "Joint pointer distribution is diagonal",
    "two_observer.mean_values": "Mean pointer value of each observer equals Tr(rho Q)",
    "breuer.restricted_equal": "Pure and mixed inputs give the same restricted state",
    "breuer.event_distance": "Per-event trace distance to R_O equals 1 - |a_l|^2",
    "breuer.always_differs": "Every event's restricted state differs from R_O",
    "classical.diagonal": "The classical ensemble stays diagonal through the schedule",
    "classical.interference": "<B> on the classical ensemble vanishes",
    "classical.born_frequency": "Classical outcome frequencies equal |a_j|^2",
    "replay.consistent": "Step-by-step replay reproduces the fast event records",
}


@dataclass(frozen=True)
class Verdict:
    """
    One claim checked against a measured value.

    Monte Carlo verdicts carry ``sigma`` (one binomial standard error) and a
    tolerance of several sigmas; analytic verdicts carry ``sigma = None``.
    A zero tolerance demands exact equality.
    """

    claim: str
    subject: str
    claimed: float
    measured: float
    tolerance: float
    sigma: Optional[float] = None

    def __post_init__(self) -> None:
        if self.claim not in CLAIMS:
            raise ArgumentError(f"Unknown claim id {self.claim!r}")
        if not self.tolerance >= 0:
            raise ArgumentError(f"Tolerance must be >= 0, got {self.tolerance!r}")

    @property
    def deviation(self) -> float:
        """``|measured − claimed|``."""
        return abs(self.measured - self.claimed)

    @property
    def passed(self) -> bool:
        """True when the measured value is within tolerance."""
        return math.isfinite(self.measured) and self.deviation <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        """Plain mapping for report files."""
        data: Dict[str, Any] = {
            "claim": self.claim,
            "subject": self.subject,
            "claimed": self.claimed,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        if self.sigma is not None:
            data["sigma"] = self.sigma
        return data


@dataclass(frozen=True)
class Summary:
    """Mean and standard error of an observable over a set of events."""

    name: str
    mean: float
    std_error: float
    count: int

    def to_dict(self) -> Dict[str, Any]:
        """Plain mapping for report files."""
        return {
            "name": self.name,
            "mean": self.mean,
            "std_error": self.std_error,
            "count": self.count,
        }


@dataclass(frozen=True)
class ExperimentReport:
    """Outcome of one experiment run."""

    experiment: str
    scenario_name: str
    scenario_digest: str
    events: int
    master_seed: int
    summaries: Tuple[Summary, ...]
    verdicts: Tuple[Verdict, ...]
    details: Mapping[str, Any] = field(default_factory=dict)
    records: Tuple[EventRecord, ...] = field(default=(), repr=False, compare=False)

    @property
    def passed(self) -> bool:
        """True when every verdict passed."""
        return all(v.passed for v in self.verdicts)

    @property
    def failures(self) -> Tuple[Verdict, ...]:
        """Verdicts that did not pass."""
        return tuple(v for v in self.verdicts if not v.passed)

    def verdicts_for(self, claim: str) -> Tuple[Verdict, ...]:
        """Every verdict of ``claim``."""
        return tuple(v for v in self.verdicts if v.claim == claim)

    def verdict(self, claim: str, subject: Optional[str] = None) -> Verdict:
        """Return the single verdict of ``claim`` (and ``subject`` if given).

        Raises:
            ArgumentError: If there is no such verdict or more than one.
        """
        found = [
            v
            for v in self.verdicts
            if v.claim == claim and (subject is None or v.subject == subject)
        ]
        if len(found) != 1:
            raise ArgumentError(
                f"Expected one verdict for {claim!r}/{subject!r}, found {len(found)}"
            )
        return found[0]

    def summary(self, name: str) -> Summary:
        """Return the summary called ``name``."""
        for item in self.summaries:
            if item.name == name:
                return item
        raise ArgumentError(f"No summary named {name!r}")

    def to_dict(self) -> Dict[str, Any]:
        """Plain mapping written as the report file."""
        return {
            "schema": SCHEMA_VERSION,
            "experiment": self.experiment,
            "scenario": {"name": self.scenario_name, "digest": self.scenario_digest},
            "events": self.events,
            "seed": self.master_seed,
            "passed": self.passed,
            "summaries": [s.to_dict() for s in self.summaries],
            "verdicts": [v.to_dict() for v in self.verdicts],
            "details": dict(self.details),
        }
