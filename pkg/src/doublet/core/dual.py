"""src/doublet/core/dual.py"""

from __future__ import annotations

import logging
import math
import multiprocessing
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import (
    Any,
    Dict,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import numpy as np
from numpy.typing import ArrayLike, NDArray

from doublet.constants import (
    DEFAULT_SEED,
    EPS_BRANCH,
    EPS_NORM,
    READY_INDEX,
    REPLAY_EVENTS,
    validate_seed,
)
from doublet.core.hilbert import (
    DensityMatrix,
    Operator,
    OperatorKind,
    State,
    StateVector,
    apply_unitary,
    generator,
    partial_trace,
    propagator,
)
from doublet.core.model import (
    InteractionMode,
    MeasurementScenario,
    Observer,
    ScheduleStep,
    StepKind,
    build_initial_state,
    build_premeasurement_unitary,
)
from doublet.core.streams import EventStreams
from doublet.errors import (
    ArgumentError,
    DegenerateDistributionError,
    NumericalConsistencyError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PointerRecord:
    """The information component of one observer: the index ``j`` of ``V^O``."""

    observer: Observer
    outcome_index: int = READY_INDEX

    def __post_init__(self) -> None:
        index = self.outcome_index
        if isinstance(index, bool) or not isinstance(index, (int, np.integer)):
            raise ArgumentError(f"Outcome index must be int, got {index!r}")
        if not 0 <= index < self.observer.dimension:
            raise ArgumentError(
                f"Outcome index {index} out of range for {self.observer.label!r} "
                f"(dimension {self.observer.dimension})"
            )
        object.__setattr__(self, "outcome_index", int(index))

    @property
    def observer_label(self) -> str:
        """Label of the observer owning the record."""
        return self.observer.label

    @property
    def dimension(self) -> int:
        """Pointer dimension of the observer."""
        return self.observer.dimension

    @property
    def is_ready(self) -> bool:
        """True while the observer holds no outcome."""
        return self.outcome_index == READY_INDEX

    @property
    def value(self) -> float:
        """Pointer-observable value of the recorded outcome."""
        return self.observer.eigenvalue(self.outcome_index)

    def with_index(self, outcome_index: int) -> PointerRecord:
        """Return a record of the same observer holding ``outcome_index``."""
        return PointerRecord(self.observer, outcome_index)


class DualState:
    """
    A dynamical component paired with one pointer record per observer.

    The dynamical component evolves unitarily whatever the records say; the
    records only change when a step resamples them.
    """

    __slots__ = ("_dynamical", "_records")

    def __init__(self, dynamical: State, records: Iterable[PointerRecord]) -> None:
        """
        Initialize a dual state.

        The first factor of the layout is S; every other factor is a pointer
        cell and must belong to exactly one record.

        Raises:
            ArgumentError: If two records share an observer, a record's cells
                are not part of the dynamical layout, or a pointer cell has no
                record.
        """
        table: Dict[str, PointerRecord] = {}
        covered: Set[str] = set()
        for record in records:
            if record.observer_label in table:
                raise ArgumentError(
                    f"Two records for observer {record.observer_label!r}"
                )
            for cell in record.observer.cells:
                if cell not in dynamical.layout:
                    raise ArgumentError(
                        f"Observer cell {cell!r} missing from {dynamical.layout!r}"
                    )
            covered.update(record.observer.cells)
            table[record.observer_label] = record
        orphans = [c for c in dynamical.layout.labels[1:] if c not in covered]
        if orphans:
            raise ArgumentError(f"Pointer cells {orphans} have no record")
        self._dynamical = dynamical
        self._records = MappingProxyType(table)

    @classmethod
    def initial(cls, scenario: MeasurementScenario) -> DualState:
        """Return the initial state with every observer ready."""
        return cls(
            build_initial_state(scenario),
            (PointerRecord(o) for o in scenario.observers),
        )

    def __repr__(self) -> str:
        records = ", ".join(f"{k}={r.outcome_index}" for k, r in self._records.items())
        return f"DualState({self._dynamical!r}, records[{records}])"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, DualState):
            return (
                self._dynamical == other._dynamical
                and dict(self._records) == dict(other._records)
            )
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    @property
    def dynamical(self) -> State:
        """The dynamical component ``φ_D``."""
        return self._dynamical

    @property
    def records(self) -> Mapping[str, PointerRecord]:
        """Read-only view of the records, keyed by observer label."""
        return self._records

    def record(self, label: str) -> PointerRecord:
        """Return the record of ``label``.

        Raises:
            ArgumentError: If the observer has no record.
        """
        try:
            return self._records[label]
        except KeyError as exc:
            raise ArgumentError(f"No record for observer {label!r}") from exc

    def outcome_indices(self) -> Dict[str, int]:
        """Return ``{observer: outcome_index}``."""
        return {label: r.outcome_index for label, r in self._records.items()}

    def evolved(self, dynamical: State) -> DualState:
        """Return a copy with a new dynamical component and the same records."""
        return DualState(dynamical, self._records.values())

    def with_record(self, record: PointerRecord) -> DualState:
        """Return a copy with one record replaced."""
        records = dict(self._records)
        records[record.observer_label] = record
        return DualState(self._dynamical, records.values())


class OutcomeDistribution:
    """
    Probabilities ``P_j`` over every pointer index, ready included.

    Entries within ``tolerance`` outside ``[0, 1]`` are clamped; the total must
    be 1 within ``tolerance``.
    """

    __slots__ = ("_weights",)

    def __init__(self, weights: ArrayLike, tolerance: float = EPS_NORM) -> None:
        """
        Initialize a distribution.

        Raises:
            ArgumentError: If the weights are not a non-empty 1-D sequence.
            DegenerateDistributionError: If every weight is zero.
            NumericalConsistencyError: If a weight leaves ``[−ε, 1 + ε]`` or
                the total differs from 1 by ``ε`` or more.
        """
        array = np.array(weights, dtype=np.float64)
        if array.ndim != 1 or array.size == 0:
            raise ArgumentError("Weights must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(array)):
            raise NumericalConsistencyError(f"Non-finite weights {array.tolist()}")
        if np.any(array < -tolerance) or np.any(array > 1.0 + tolerance):
            raise NumericalConsistencyError(f"Weights out of [0, 1]: {array.tolist()}")
        array = np.clip(array, 0.0, 1.0)
        total = float(array.sum())
        if total == 0.0:
            raise DegenerateDistributionError()
        if abs(total - 1.0) >= tolerance:
            raise NumericalConsistencyError(f"Weights sum to {total!r}, not 1")
        array.setflags(write=False)
        self._weights = array

    def __repr__(self) -> str:
        return f"OutcomeDistribution({np.round(self._weights, 12).tolist()})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, OutcomeDistribution):
            return np.array_equal(self._weights, other._weights)
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return int(self._weights.shape[0])

    def __getitem__(self, index: int) -> float:
        return float(self._weights[index])

    @property
    def weights(self) -> NDArray[np.float64]:
        """Read-only weight vector."""
        return self._weights

    @property
    def ready(self) -> float:
        """Weight left on the ready state."""
        return float(self._weights[READY_INDEX])

    def cumulative(self) -> NDArray[np.float64]:
        """Cumulative sums normalized so the last entry is exactly 1."""
        totals = np.cumsum(self._weights)
        return totals / totals[-1]

    def allclose(
        self, other: Union[OutcomeDistribution, ArrayLike], atol: float = EPS_NORM
    ) -> bool:
        """Compare weights with an absolute tolerance."""
        theirs = other.weights if isinstance(other, OutcomeDistribution) else other
        return bool(np.allclose(self._weights, theirs, rtol=0.0, atol=atol))


def _pick(cumulative: NDArray[np.float64], uniform: float) -> int:
    # Index j owns the half-open interval [c_{j-1}, c_j).
    index = int(np.searchsorted(cumulative, uniform, side="right"))
    return min(index, cumulative.shape[0] - 1)


@dataclass(frozen=True)
class StatisticalDualState:
    """The dynamical component with the outcome distribution of each observer."""

    dynamical: State
    distributions: Mapping[str, OutcomeDistribution]

    def distribution(self, label: str) -> OutcomeDistribution:
        """Return the distribution of ``label``."""
        try:
            return self.distributions[label]
        except KeyError as exc:
            raise ArgumentError(f"No distribution for observer {label!r}") from exc


@dataclass(frozen=True)
class EventRecord:
    """What one event produced: sampled outcomes, final records and scalars."""

    event_index: int
    rng_seed: int
    step_outcomes: Tuple[Tuple[str, str, int], ...]
    records: Mapping[str, int]
    scalars: Mapping[str, float] = field(default_factory=dict)

    def outcome(self, step_id: str, observer: str) -> int:
        """Return the index sampled for ``observer`` at ``step_id``.

        Raises:
            ArgumentError: If that step did not sample that observer.
        """
        for sid, label, index in self.step_outcomes:
            if sid == step_id and label == observer:
                return index
        raise ArgumentError(f"No outcome for {observer!r} at step {step_id!r}")

    def outcomes_of(self, observer: str) -> Tuple[int, ...]:
        """Every index sampled for ``observer``, in step order."""
        return tuple(i for _, label, i in self.step_outcomes if label == observer)

    def to_dict(self) -> Dict[str, Any]:
        """Plain mapping written as one event-log line."""
        return {
            "event_index": self.event_index,
            "seed": self.rng_seed,
            "outcomes": [list(entry) for entry in self.step_outcomes],
            "records": dict(self.records),
            "scalars": dict(self.scalars),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> EventRecord:
        """Inverse of :meth:`to_dict`."""
        return cls(
            event_index=int(data["event_index"]),
            rng_seed=int(data["seed"]),
            step_outcomes=tuple(
                (str(sid), str(label), int(index))
                for sid, label, index in data["outcomes"]
            ),
            records={str(k): int(v) for k, v in data["records"].items()},
            scalars={str(k): float(v) for k, v in data.get("scalars", {}).items()},
        )


@dataclass(frozen=True, eq=False)
class CompiledStep:
    """
    A schedule step turned into operators.

    ``propagator`` advances one of ``substeps`` equal slices of the window;
    ``unitary`` covers the whole window. ``resample`` lists the observers
    whose records are redrawn at the end of the step.
    """

    index: int
    step: ScheduleStep
    propagator: Operator
    substeps: int
    unitary: Operator
    hamiltonian: Optional[Operator]
    resample: Tuple[Observer, ...]

    @property
    def step_id(self) -> str:
        """Stable identifier used in event records, e.g. ``"0:interact"``."""
        return f"{self.index}:{self.step.kind.value}"

    @property
    def times(self) -> NDArray[np.float64]:
        """Substep boundaries from ``t_start`` to ``t_end``."""
        return np.linspace(self.step.t_start, self.step.t_end, self.substeps + 1)


def pointer_distribution(dynamical: State, observer: Observer) -> OutcomeDistribution:
    """
    Return ``P_j = Tr(P̂^O_j ρ)`` for every pointer index ``j``.

    Args:
        dynamical: State vector or density matrix on a layout holding the
            observer's cells.
        observer: Observer to read.
    """
    layout = dynamical.layout
    if isinstance(dynamical, StateVector):
        populations = np.abs(dynamical.amplitudes) ** 2
    else:
        populations = dynamical.diagonal()
    weights = [
        float(populations[observer.mask(layout, j)].sum())
        for j in range(observer.dimension)
    ]
    return OutcomeDistribution(weights)


def sample_outcome(
    dist: Union[OutcomeDistribution, ArrayLike], rng: np.random.Generator
) -> int:
    """
    Draw one pointer index with probability ``P_j``.

    Consumes exactly one uniform from ``rng``.

    Raises:
        DegenerateDistributionError: If every weight is zero.
    """
    if not isinstance(dist, OutcomeDistribution):
        dist = OutcomeDistribution(dist)
    return _pick(dist.cumulative(), float(rng.random()))


def identity_guard(hamiltonian: Operator, observer: Observer) -> bool:
    """
    Tell whether ``H`` conserves the observer's record.

    True iff every block ``P̂_i H P̂_j`` with ``i ≠ j`` has operator norm below
    ``EPS_BRANCH``. For a many-cell pointer the states where the cells disagree
    form one more branch, so ``H`` may not leak into them either.
    """
    layout = hamiltonian.layout
    masks = [observer.mask(layout, j) for j in range(observer.dimension)]
    masks.append(~np.logical_or.reduce(masks))
    entries = hamiltonian.entries
    for i, rows in enumerate(masks):
        for j, cols in enumerate(masks):
            if i == j or not rows.any() or not cols.any():
                continue
            block = entries[np.ix_(rows, cols)]
            if float(np.linalg.norm(block, ord=2)) >= EPS_BRANCH:
                return False
    return True


def _substeps(duration: float, time_step: Optional[float]) -> int:
    if time_step is None or duration == 0:
        return 1
    return max(1, math.ceil(duration / time_step - 1e-9))


def _windowed(
    hamiltonian: Operator, duration: float, count: int
) -> Tuple[Operator, Operator]:
    slice_propagator = propagator(hamiltonian, duration / count)
    total = np.linalg.matrix_power(slice_propagator.entries, count)
    return slice_propagator, Operator(total, hamiltonian.layout, OperatorKind.UNITARY)


# pylint: disable=too-many-locals
def compile_schedule(scenario: MeasurementScenario) -> Tuple[CompiledStep, ...]:
    """
    Turn the scenario schedule into operators.

    Interact steps realize the observer's interaction (its supplied ``Ĥ_I``
    over the window, else the pre-measurement unitary). Reverse steps apply
    the adjoint of that observer's latest interaction. Free steps evolve under
    the free Hamiltonian. In continuous mode every window is sliced into
    ``time_step`` substeps of a generator realizing the same window unitary.

    Interact and reverse steps resample their observer; a free step resamples
    exactly the observers whose identity guard fails.
    """
    layout = scenario.layout
    continuous = scenario.interaction_mode is InteractionMode.CONTINUOUS
    free_hamiltonian = scenario.free_hamiltonian()
    free_is_zero = not np.any(free_hamiltonian.entries)
    latest: Dict[str, Operator] = {}
    # Observer whose latest interaction took S to the final basis.
    mapped_by: Optional[str] = None
    compiled: List[CompiledStep] = []

    for index, step in enumerate(scenario.schedule):
        duration = step.duration
        hamiltonian: Optional[Operator]
        if step.kind is StepKind.FREE:
            hamiltonian = free_hamiltonian
            resample = tuple(
                o for o in scenario.observers if not identity_guard(free_hamiltonian, o)
            )
            if resample:
                logger.debug(
                    "Free step %d couples pointer branches of %s",
                    index,
                    [o.label for o in resample],
                )
            if free_is_zero or duration == 0:
                identity = Operator.identity(layout)
                slice_propagator, unitary, count = identity, identity, 1
            else:
                count = _substeps(duration, scenario.time_step if continuous else None)
                slice_propagator, unitary = _windowed(free_hamiltonian, duration, count)
        else:
            label = step.observer or ""
            resample = (scenario.observer(label),)
            supplied = None
            if step.kind is StepKind.INTERACT:
                supplied = scenario.interaction_hamiltonian(label)
                if supplied is None:
                    maps = mapped_by is None
                    target = build_premeasurement_unitary(
                        scenario, label, maps_system=maps
                    )
                    if maps and scenario.s_final_map is not None:
                        mapped_by = label
                else:
                    target = propagator(supplied, duration)
                latest[label] = target
            else:
                if label not in latest:
                    latest[label] = build_premeasurement_unitary(scenario, label)
                target = latest[label].adjoint()
                if mapped_by == label:
                    mapped_by = None

            if continuous:
                hamiltonian = supplied or generator(target, duration)
                count = _substeps(duration, scenario.time_step)
                slice_propagator, unitary = _windowed(hamiltonian, duration, count)
            else:
                hamiltonian = supplied
                slice_propagator, unitary, count = target, target, 1

        compiled.append(
            CompiledStep(
                index=index,
                step=step,
                propagator=slice_propagator,
                substeps=count,
                unitary=unitary,
                hamiltonian=hamiltonian,
                resample=resample,
            )
        )

    logger.debug(
        "Compiled %d steps for %r: %s",
        len(compiled),
        scenario.name,
        [(c.step_id, c.substeps, [o.label for o in c.resample]) for c in compiled],
    )
    return tuple(compiled)


def step(
    dual: DualState, compiled: CompiledStep, rng: np.random.Generator
) -> DualState:
    """
    Advance a dual state through one compiled step.

    The dynamical component is propagated by the step's unitary. Then each
    observer in ``compiled.resample`` draws a fresh record from its pointer
    distribution at the end of the step; all other records are kept.
    """
    advanced = dual.evolved(apply_unitary(dual.dynamical, compiled.unitary))
    for observer in compiled.resample:
        dist = pointer_distribution(advanced.dynamical, observer)
        index = sample_outcome(dist, rng)
        advanced = advanced.with_record(PointerRecord(observer, index))
    return advanced


def restricted_state_statistical(dynamical: State, observer: Observer) -> DensityMatrix:
    """Return ``R_O``: the dynamical component traced down to the observer."""
    return partial_trace(dynamical, observer.cells)


def restricted_state_event(dual: DualState, observer: str) -> DensityMatrix:
    """Return ``R^V = |O_l><O_l|`` for the recorded index ``l``."""
    record = dual.record(observer)
    layout = record.observer.pointer_layout(dual.dynamical.layout)
    ket = record.observer.pointer_ket(dual.dynamical.layout, record.outcome_index)
    return DensityMatrix(np.outer(ket, ket.conj()), layout)


def transition_probability(
    unitary: Operator, initial: StateVector, target: StateVector
) -> float:
    """Return ``|<target| U |initial>|²``."""
    if unitary.kind is not OperatorKind.UNITARY:
        raise ArgumentError(f"Expected a unitary operator, got {unitary.kind.value}")
    moved = apply_unitary(initial, unitary)
    return abs(target.inner(moved)) ** 2


def statistical_dual_state(
    dynamical: State, observers: Sequence[Observer]
) -> StatisticalDualState:
    """Return the dynamical component with every observer's distribution."""
    return StatisticalDualState(
        dynamical,
        MappingProxyType(
            {o.label: pointer_distribution(dynamical, o) for o in observers}
        ),
    )


def joint_distribution(
    dynamical: State, first: Observer, second: Observer
) -> NDArray[np.float64]:
    """
    Return ``P_ij = Tr(ρ P̂^O_i P̂^O′_j)`` for every pair of pointer indices.

    Raises:
        ArgumentError: If both arguments are the same observer.
    """
    if first.label == second.label:
        raise ArgumentError("A joint distribution needs two distinct observers")
    layout = dynamical.layout
    if isinstance(dynamical, StateVector):
        populations = np.abs(dynamical.amplitudes) ** 2
    else:
        populations = dynamical.diagonal()
    first_masks = [first.mask(layout, i) for i in range(first.dimension)]
    second_masks = [second.mask(layout, j) for j in range(second.dimension)]
    joint = np.zeros((first.dimension, second.dimension))
    for i, rows in enumerate(first_masks):
        for j, cols in enumerate(second_masks):
            joint[i, j] = populations[rows & cols].sum()
    return joint


def pointer_trajectory(
    dynamical: State, compiled: CompiledStep, observer: Observer
) -> List[Tuple[float, OutcomeDistribution]]:
    """
    Return ``(t, P(t))`` at every substep boundary of a compiled step.

    ``dynamical`` is the state at the start of the step.
    """
    points = [(float(compiled.step.t_start), pointer_distribution(dynamical, observer))]
    current = dynamical
    for moment in compiled.times[1:]:
        current = apply_unitary(current, compiled.propagator)
        points.append((float(moment), pointer_distribution(current, observer)))
    return points


def _run_chunk(
    arguments: Tuple[MeasurementScenario, int, int, int],
) -> List[EventRecord]:
    scenario, master_seed, start, stop = arguments
    return DualEngine(scenario, master_seed).run(stop - start, start=start)


class DualEngine:
    """
    Runs events of a scenario.

    The dynamical trajectory does not depend on the records, so it is computed
    once; :meth:`run` then only draws the records of each event. :meth:`replay`
    carries one event through :func:`step` and returns every intermediate dual
    state. Both consume the same per-event stream in the same order and yield
    identical records for the same event index.
    """

    __slots__ = (
        "_scenario",
        "_seed",
        "_compiled",
        "_initial",
        "_states",
        "_plan",
        "_streams",
    )

    def __init__(
        self, scenario: MeasurementScenario, master_seed: int = DEFAULT_SEED
    ) -> None:
        """
        Initialize the engine and precompute the dynamical trajectory.

        Args:
            scenario (MeasurementScenario): Validated scenario.
            master_seed (int): 64-bit master seed.
        """
        self._scenario = scenario
        self._seed = validate_seed(master_seed)
        self._compiled = compile_schedule(scenario)
        self._initial = DualState.initial(scenario)

        states = [self._initial.dynamical]
        cumulative: List[Tuple[Tuple[Observer, NDArray[np.float64]], ...]] = []
        for compiled in self._compiled:
            advanced = apply_unitary(states[-1], compiled.unitary)
            states.append(advanced)
            cumulative.append(
                tuple(
                    (o, pointer_distribution(advanced, o).cumulative())
                    for o in compiled.resample
                )
            )
        self._states: Tuple[State, ...] = tuple(states)
        # One uniform per (step, observer) draw, in stream order.
        self._plan = tuple(
            (compiled.step_id, observer.label, values)
            for compiled, draws in zip(self._compiled, cumulative)
            for observer, values in draws
        )
        self._streams = EventStreams(self._seed)

    def __repr__(self) -> str:
        return f"DualEngine({self._scenario.name!r}, seed={self._seed})"

    @property
    def scenario(self) -> MeasurementScenario:
        """Scenario being simulated."""
        return self._scenario

    @property
    def master_seed(self) -> int:
        """Master seed of every event stream."""
        return self._seed

    @property
    def compiled(self) -> Tuple[CompiledStep, ...]:
        """Compiled schedule."""
        return self._compiled

    @property
    def initial(self) -> DualState:
        """Dual state before the first step."""
        return self._initial

    def dynamical_after(self, position: int) -> State:
        """Dynamical component after ``position`` steps (0 = initial)."""
        return self._states[position]

    @property
    def final_dynamical(self) -> State:
        """Dynamical component after the whole schedule."""
        return self._states[-1]

    def _record(
        self,
        index: int,
        outcomes: List[Tuple[str, str, int]],
        final: Dict[str, int],
    ) -> EventRecord:
        scalars = {
            f"q.{o.label}": o.eigenvalue(final[o.label])
            for o in self._scenario.observers
        }
        return EventRecord(index, self._seed, tuple(outcomes), final, scalars)

    def _draw(self, start: int, stop: int) -> List[EventRecord]:
        width = len(self._plan)
        uniforms = np.empty((stop - start, width))
        for row, index in enumerate(range(start, stop)):
            uniforms[row] = self._streams.at(index).random(width)

        picks = np.empty(uniforms.shape, dtype=np.int64)
        for column, (_, _, cumulative) in enumerate(self._plan):
            found = np.searchsorted(cumulative, uniforms[:, column], side="right")
            picks[:, column] = np.minimum(found, cumulative.shape[0] - 1)

        labels = [o.label for o in self._scenario.observers]
        records: List[EventRecord] = []
        for index, row in zip(range(start, stop), picks.tolist()):
            final = dict.fromkeys(labels, READY_INDEX)
            outcomes: List[Tuple[str, str, int]] = []
            for (step_id, label, _), sampled in zip(self._plan, row):
                final[label] = sampled
                outcomes.append((step_id, label, sampled))
            records.append(self._record(index, outcomes, final))
        return records

    def event(self, index: int) -> EventRecord:
        """Draw the records of event ``index`` against the precomputed dynamics."""
        return self._draw(index, index + 1)[0]

    def replay(self, index: int) -> Tuple[EventRecord, Tuple[DualState, ...]]:
        """
        Carry event ``index`` through :func:`step`.

        Returns:
            The event record and the dual state after every step (initial first).
        """
        rng = self._streams.at(index)
        states = [self._initial]
        outcomes: List[Tuple[str, str, int]] = []
        for compiled in self._compiled:
            states.append(step(states[-1], compiled, rng))
            for observer in compiled.resample:
                sampled = states[-1].record(observer.label).outcome_index
                outcomes.append((compiled.step_id, observer.label, sampled))
        record = self._record(index, outcomes, states[-1].outcome_indices())
        return record, tuple(states)

    def run(self, events: int, start: int = 0, workers: int = 1) -> List[EventRecord]:
        """
        Run events ``start .. start + events - 1``.

        Args:
            events (int): Number of events (>= 0).
            start (int): First event index.
            workers (int): Worker processes; 1 runs in-process.

        Returns:
            List[EventRecord]: Records in event-index order.
        """
        if events < 0 or start < 0:
            raise ArgumentError(f"Invalid event range start={start}, events={events}")
        if workers < 1:
            raise ArgumentError(f"workers must be >= 1, got {workers}")
        if workers == 1 or events < 2 * workers:
            return self._draw(start, start + events)

        size = math.ceil(events / workers)
        chunks = [
            (self._scenario, self._seed, lo, min(lo + size, start + events))
            for lo in range(start, start + events, size)
        ]
        logger.debug("Dispatching %d events to %d workers", events, len(chunks))
        with multiprocessing.Pool(processes=workers) as pool:
            parts = pool.map(_run_chunk, chunks)
        return [record for part in parts for record in part]

    def replay_consistent(self, events: int = REPLAY_EVENTS) -> bool:
        """Check that :meth:`replay` and :meth:`event` agree on the first events."""
        return all(
            self.replay(i)[0] == self.event(i) for i in range(events)
        )
