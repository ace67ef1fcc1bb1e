"""src/doublet/core/model.py"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import (
    Any,
    Dict,
    Iterable,
    Iterator,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from numpy.typing import ArrayLike, NDArray

from doublet.constants import (
    E_NORM,
    E_SCHED,
    E_SCHEMA,
    EPS_NORM,
    MAX_TOTAL_DIMENSION,
    READY_INDEX,
)
from doublet.core.hilbert import (
    DensityMatrix,
    Operator,
    OperatorKind,
    StateVector,
    SubsystemLayout,
    embed,
)
from doublet.errors import (
    ArgumentError,
    CapacityError,
    ScenarioError,
    UnsupportedScenarioError,
)


class StepKind(str, Enum):
    """What a schedule step does to the measuring system."""

    INTERACT = "interact"
    REVERSE = "reverse"
    FREE = "free"


class InputKind(str, Enum):
    """Whether S enters as a superposition or as the Born mixture."""

    PURE = "pure"
    MIXED = "mixed"


class InteractionMode(str, Enum):
    """How interact and reverse steps are realized."""

    UNITARY = "unitary"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class ScheduleStep:
    """One time window of an :class:`InteractionSchedule`."""

    kind: StepKind
    t_start: float
    t_end: float
    observer: Optional[str] = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "kind", StepKind(self.kind))
        except ValueError as exc:
            raise ScenarioError(E_SCHEMA, f"Unknown step kind {self.kind!r}") from exc

        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise ScenarioError(E_SCHED, "Step times must be finite")
        if self.kind is StepKind.FREE:
            if self.observer is not None:
                raise ScenarioError(E_SCHEMA, "Free steps do not name an observer")
            if self.t_end < self.t_start:
                raise ScenarioError(E_SCHED, "Free step ends before it starts")
        else:
            if not self.observer:
                raise ScenarioError(
                    E_SCHEMA, f"{self.kind.value} steps must name an observer"
                )
            if self.t_end <= self.t_start:
                raise ScenarioError(
                    E_SCHED,
                    f"{self.kind.value} step needs t_end > t_start, "
                    f"got [{self.t_start}, {self.t_end}]",
                )

    @property
    def duration(self) -> float:
        """Length of the window."""
        return self.t_end - self.t_start

    def __str__(self) -> str:
        who = f"({self.observer})" if self.observer else ""
        return f"{self.kind.value}{who}[{self.t_start:g}, {self.t_end:g}]"


class InteractionSchedule:
    """
    Time-ordered, non-overlapping sequence of schedule steps.

    Adjacent steps may touch (one ends exactly when the next starts). Because
    windows never overlap, two observers never interact simultaneously.
    """

    __slots__ = ("_steps",)

    def __init__(self, steps: Iterable[ScheduleStep]) -> None:
        """
        Initialize the schedule.

        Raises:
            ScenarioError: ``E_SCHED`` if steps overlap or are out of order.
        """
        ordered = tuple(steps)
        for previous, current in zip(ordered, ordered[1:]):
            if current.t_start < previous.t_end:
                raise ScenarioError(
                    E_SCHED, f"Step {current} overlaps or precedes step {previous}"
                )
        self._steps: Tuple[ScheduleStep, ...] = ordered

    @classmethod
    def sequential(
        cls,
        entries: Sequence[Union[Tuple[str, Optional[str]], str]],
        duration: float = 1.0,
    ) -> InteractionSchedule:
        """Lay out steps back to back, each ``duration`` long, from ``t = 0``.

        Args:
            entries: ``(kind, observer)`` pairs, or a bare ``"free"``.
            duration (float): Window length of every step.
        """
        steps = []
        for position, entry in enumerate(entries):
            kind, observer = (entry, None) if isinstance(entry, str) else entry
            start = position * duration
            end = start + duration
            steps.append(ScheduleStep(StepKind(kind), start, end, observer))
        return cls(steps)

    def __repr__(self) -> str:
        return f"InteractionSchedule({', '.join(str(s) for s in self._steps)})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, InteractionSchedule):
            return self._steps == other._steps
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._steps)

    def __len__(self) -> int:
        return len(self._steps)

    def __iter__(self) -> Iterator[ScheduleStep]:
        return iter(self._steps)

    def __getitem__(self, position: int) -> ScheduleStep:
        return self._steps[position]

    @property
    def steps(self) -> Tuple[ScheduleStep, ...]:
        """The steps in time order."""
        return self._steps

    def pattern(self, skip_free: bool = True) -> Tuple[Tuple[str, Optional[str]], ...]:
        """Return ``(kind, observer)`` per step, free steps dropped by default."""
        return tuple(
            (step.kind.value, step.observer)
            for step in self._steps
            if not (skip_free and step.kind is StepKind.FREE)
        )

    def boundaries(self) -> Dict[str, float]:
        """Return the named boundaries ``t0``, ``t1`` and ``t2`` that exist.

        ``t0``/``t1`` bound the first interact step; ``t2`` starts the second.
        """
        interacts = [s for s in self._steps if s.kind is StepKind.INTERACT]
        named: Dict[str, float] = {}
        if interacts:
            named["t0"] = interacts[0].t_start
            named["t1"] = interacts[0].t_end
        if len(interacts) > 1:
            named["t2"] = interacts[1].t_start
        return named


@dataclass(frozen=True)
class Observer:
    """
    An observer factor: a ready state plus one pointer state per outcome.

    ``cells`` lists the layout factors that carry the pointer. A single-cell
    observer stores its pointer in the factor named after it; a many-DF
    observer replicates the pointer over several cells and reads outcome ``j``
    only when every cell agrees on ``j``.
    """

    label: str
    eigenvalues: Tuple[float, ...] = ()
    dimension: int = 0
    cells: Tuple[str, ...] = field(default=())

    @property
    def outcomes(self) -> int:
        """Number of pointer outcomes (ready excluded)."""
        return self.dimension - 1

    def eigenvalue(self, index: int) -> float:
        """Pointer-observable value ``q^O_j``; the ready index reads 0."""
        if index == READY_INDEX:
            return 0.0
        return self.eigenvalues[index - 1]

    def mask(self, layout: SubsystemLayout, index: int) -> NDArray[np.bool_]:
        """Basis indices of ``layout`` where every cell reads ``index``."""
        if isinstance(index, bool) or not 0 <= index < self.dimension:
            raise ArgumentError(
                f"Pointer index {index!r} out of range for {self.label!r}"
            )
        selected = np.ones(layout.total_dimension, dtype=bool)
        for cell in self.cells:
            selected &= layout.digits(cell) == index
        return selected

    def projector(self, layout: SubsystemLayout, index: int) -> Operator:
        """Return ``P̂^O_j`` on ``layout``."""
        diagonal = self.mask(layout, index).astype(np.complex128)
        return Operator(np.diag(diagonal), layout, OperatorKind.PROJECTOR)

    def pointer_layout(self, layout: SubsystemLayout) -> SubsystemLayout:
        """The observer's own factors, in layout order."""
        return layout.restrict(self.cells)

    def pointer_ket(
        self, layout: SubsystemLayout, index: int
    ) -> NDArray[np.complex128]:
        """Amplitudes of ``|O_j>`` on :meth:`pointer_layout`."""
        local = self.pointer_layout(layout)
        return StateVector.basis(local, {cell: index for cell in self.cells}).amplitudes


class HamiltonianTerm:
    """A Hermitian matrix acting on a few named factors."""

    __slots__ = ("_factors", "_matrix")

    def __init__(self, factors: Sequence[str], matrix: ArrayLike) -> None:
        """
        Initialize the term.

        Args:
            factors (Sequence[str]): Factor labels, in the matrix's tensor order.
            matrix (ArrayLike): Square Hermitian matrix.

        Raises:
            ScenarioError: ``E_SCHEMA`` if the matrix is not square Hermitian.
        """
        array = np.array(matrix, dtype=np.complex128)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ScenarioError(E_SCHEMA, "Hamiltonian terms need a square matrix")
        if float(np.max(np.abs(array - array.conj().T))) >= EPS_NORM:
            raise ScenarioError(E_SCHEMA, "Hamiltonian terms must be Hermitian")
        if not factors:
            raise ScenarioError(E_SCHEMA, "Hamiltonian terms must name their factors")
        array.setflags(write=False)
        self._factors = tuple(factors)
        self._matrix = array

    def __repr__(self) -> str:
        return f"HamiltonianTerm({'⊗'.join(self._factors)})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, HamiltonianTerm):
            return self._factors == other._factors and np.array_equal(
                self._matrix, other._matrix
            )
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    @property
    def factors(self) -> Tuple[str, ...]:
        """Factor labels the matrix acts on."""
        return self._factors

    @property
    def matrix(self) -> NDArray[np.complex128]:
        """Read-only matrix."""
        return self._matrix

    def to_operator(self, layout: SubsystemLayout) -> Operator:
        """Embed the term into ``layout``."""
        dims = [layout.dimension(label) for label in self._factors]
        local = SubsystemLayout(zip(self._factors, dims))
        return embed(Operator(self._matrix, local, OperatorKind.HERMITIAN), layout)


def _sum_terms(terms: Sequence[HamiltonianTerm], layout: SubsystemLayout) -> Operator:
    total = np.zeros((layout.total_dimension,) * 2, dtype=np.complex128)
    for term in terms:
        total = total + term.to_operator(layout).entries
    return Operator(total, layout, OperatorKind.HERMITIAN)


# pylint: disable=too-many-instance-attributes
class MeasurementScenario:
    """
    Everything needed to simulate one measurement chain.

    S is a ``d``-level system prepared as ``Σ a_i |s_i>``; each observer carries
    a pointer of dimension ``d + 1`` (ready plus one state per outcome). The
    layout is ``S`` followed by every observer's cells in declaration order.
    """

    __slots__ = (
        "_name",
        "_amplitudes",
        "_observers",
        "_schedule",
        "_system_label",
        "_s_final_map",
        "_pointer_df_count",
        "_input_kind",
        "_interaction_mode",
        "_time_step",
        "_free_terms",
        "_interaction_terms",
        "_layout",
        "_max_dimension",
    )

    # pylint: disable=too-many-arguments, too-many-locals
    def __init__(
        self,
        amplitudes: ArrayLike,
        observers: Sequence[Union[Observer, str]],
        schedule: InteractionSchedule,
        *,
        name: str = "scenario",
        system_label: str = "S",
        s_final_map: Optional[ArrayLike] = None,
        pointer_df_count: int = 1,
        input_kind: Union[InputKind, str] = InputKind.PURE,
        interaction_mode: Union[InteractionMode, str] = InteractionMode.UNITARY,
        time_step: Optional[float] = None,
        free_hamiltonian: Sequence[HamiltonianTerm] = (),
        interaction_hamiltonians: Optional[
            Mapping[str, Sequence[HamiltonianTerm]]
        ] = None,
        max_dimension: int = MAX_TOTAL_DIMENSION,
    ) -> None:
        """
        Initialize and validate a scenario.

        Raises:
            ScenarioError: On any schema (``E_SCHEMA``), normalization
                (``E_NORM``) or schedule (``E_SCHED``) violation.
            CapacityError: If the layout exceeds ``max_dimension``.
        """
        self._name = str(name)
        self._amplitudes = self._validated_amplitudes(amplitudes)
        outcomes = self._amplitudes.shape[0]

        if isinstance(pointer_df_count, bool) or not isinstance(pointer_df_count, int):
            raise ScenarioError(E_SCHEMA, "pointer_df_count must be an integer")
        if pointer_df_count < 1:
            raise ScenarioError(E_SCHEMA, "pointer_df_count must be >= 1")
        self._pointer_df_count = pointer_df_count
        self._system_label = system_label

        self._observers = tuple(
            self._resolve_observer(o, outcomes, pointer_df_count) for o in observers
        )
        if not self._observers:
            raise ScenarioError(E_SCHEMA, "A scenario needs at least one observer")
        labels = [o.label for o in self._observers]
        if len(set(labels)) != len(labels) or system_label in labels:
            raise ScenarioError(E_SCHEMA, f"Duplicate observer labels in {labels}")

        factors = [(system_label, outcomes)]
        for observer in self._observers:
            factors.extend((cell, observer.dimension) for cell in observer.cells)
        dimension = math.prod(dim for _, dim in factors)
        if dimension > max_dimension:
            raise CapacityError(dimension, max_dimension)
        try:
            self._layout = SubsystemLayout(factors)
        except ArgumentError as exc:
            raise ScenarioError(E_SCHEMA, str(exc)) from exc
        self._max_dimension = max_dimension

        for step in schedule:
            if step.observer is not None and step.observer not in labels:
                raise ScenarioError(
                    E_SCHED, f"Step {step} names unknown observer {step.observer!r}"
                )
        self._schedule = schedule

        self._s_final_map = self._validated_final_map(s_final_map, outcomes)

        try:
            self._input_kind = InputKind(input_kind)
            self._interaction_mode = InteractionMode(interaction_mode)
        except ValueError as exc:
            raise ScenarioError(E_SCHEMA, str(exc)) from exc

        if time_step is not None and not (math.isfinite(time_step) and time_step > 0):
            raise ScenarioError(E_SCHEMA, f"time_step must be > 0, got {time_step}")
        if self._interaction_mode is InteractionMode.CONTINUOUS and time_step is None:
            raise ScenarioError(E_SCHEMA, "Continuous interactions need a time_step")
        self._time_step = time_step

        self._free_terms = tuple(free_hamiltonian)
        self._interaction_terms = {
            label: tuple(terms)
            for label, terms in (interaction_hamiltonians or {}).items()
        }
        for label in self._interaction_terms:
            if label not in labels:
                raise ScenarioError(
                    E_SCHEMA, f"Interaction Hamiltonian for unknown observer {label!r}"
                )
        for term in self._all_terms():
            for factor in term.factors:
                if factor not in self._layout:
                    raise ScenarioError(
                        E_SCHEMA, f"Hamiltonian term acts on unknown factor {factor!r}"
                    )
            expected = math.prod(self._layout.dimension(f) for f in term.factors)
            if term.matrix.shape[0] != expected:
                raise ScenarioError(
                    E_SCHEMA, f"{term!r} needs a {expected}x{expected} matrix"
                )
        if pointer_df_count > 1:
            cells = {cell for o in self._observers for cell in o.cells}
            for term in self._all_terms():
                touched = sorted(cells.intersection(term.factors))
                if touched:
                    raise ScenarioError(
                        E_SCHEMA,
                        f"Hamiltonian terms cannot act on pointer cells {touched} "
                        f"when pointer_df_count > 1",
                    )

    @staticmethod
    def _validated_amplitudes(amplitudes: ArrayLike) -> NDArray[np.complex128]:
        array = np.array(amplitudes, dtype=np.complex128)
        if array.ndim != 1 or array.shape[0] < 2:
            raise ScenarioError(E_SCHEMA, "S needs at least two amplitudes")
        weight = float(np.sum(np.abs(array) ** 2))
        if abs(weight - 1.0) >= EPS_NORM:
            raise ScenarioError(E_NORM, f"Σ|a_i|² = {weight:.12g}, expected 1")
        array.setflags(write=False)
        return array

    @staticmethod
    def _validated_final_map(
        matrix: Optional[ArrayLike], outcomes: int
    ) -> Optional[NDArray[np.complex128]]:
        if matrix is None:
            return None
        array = np.array(matrix, dtype=np.complex128)
        if array.shape != (outcomes, outcomes):
            raise ScenarioError(
                E_SCHEMA, f"s_final_map must be {outcomes}x{outcomes}"
            )
        if float(np.max(np.abs(array @ array.conj().T - np.eye(outcomes)))) >= EPS_NORM:
            raise ScenarioError(E_SCHEMA, "s_final_map must be unitary")
        array.setflags(write=False)
        return array

    @staticmethod
    def _resolve_observer(
        observer: Union[Observer, str], outcomes: int, df_count: int
    ) -> Observer:
        if isinstance(observer, str):
            observer = Observer(observer)
        if not observer.label:
            raise ScenarioError(E_SCHEMA, "Observer labels must be non-empty")
        if observer.dimension not in (0, outcomes + 1):
            raise ScenarioError(
                E_SCHEMA,
                f"Observer {observer.label!r} pointer dimension {observer.dimension} "
                f"must equal the outcome count + 1 ({outcomes + 1})",
            )
        eigenvalues = observer.eigenvalues or tuple(
            float(j) for j in range(1, outcomes + 1)
        )
        if len(eigenvalues) != outcomes or not all(
            math.isfinite(q) for q in eigenvalues
        ):
            raise ScenarioError(
                E_SCHEMA,
                f"Observer {observer.label!r} needs {outcomes} finite eigenvalues",
            )
        if df_count == 1:
            cells: Tuple[str, ...] = (observer.label,)
        else:
            cells = tuple(f"{observer.label}.{k}" for k in range(1, df_count + 1))
        return Observer(
            observer.label, tuple(float(q) for q in eigenvalues), outcomes + 1, cells
        )

    def _all_terms(self) -> Iterator[HamiltonianTerm]:
        yield from self._free_terms
        for terms in self._interaction_terms.values():
            yield from terms

    def __repr__(self) -> str:
        observers = ", ".join(o.label for o in self._observers)
        return (
            f"MeasurementScenario({self._name!r}, a={np.round(self._amplitudes, 6)}, "
            f"observers=[{observers}], {self._schedule!r})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MeasurementScenario):
            return NotImplemented
        same_map = (self._s_final_map is None and other._s_final_map is None) or (
            self._s_final_map is not None
            and other._s_final_map is not None
            and np.array_equal(self._s_final_map, other._s_final_map)
        )
        return (
            same_map
            and np.array_equal(self._amplitudes, other._amplitudes)
            and self._name == other._name
            and self._system_label == other._system_label
            and self._observers == other._observers
            and self._schedule == other._schedule
            and self._pointer_df_count == other._pointer_df_count
            and self._input_kind is other._input_kind
            and self._interaction_mode is other._interaction_mode
            and self._time_step == other._time_step
            and self._free_terms == other._free_terms
            and self._interaction_terms == other._interaction_terms
        )

    __hash__ = None  # type: ignore[assignment]

    def replace(self, **changes: Any) -> MeasurementScenario:
        """Return a copy with some constructor arguments changed."""
        arguments: Dict[str, Any] = {
            "amplitudes": self._amplitudes,
            "observers": [
                Observer(o.label, o.eigenvalues) for o in self._observers
            ],
            "schedule": self._schedule,
            "name": self._name,
            "system_label": self._system_label,
            "s_final_map": self._s_final_map,
            "pointer_df_count": self._pointer_df_count,
            "input_kind": self._input_kind,
            "interaction_mode": self._interaction_mode,
            "time_step": self._time_step,
            "free_hamiltonian": self._free_terms,
            "interaction_hamiltonians": self._interaction_terms,
            "max_dimension": self._max_dimension,
        }
        unknown = set(changes) - set(arguments)
        if unknown:
            raise ArgumentError(f"Unknown scenario fields {sorted(unknown)}")
        arguments.update(changes)
        amplitudes = arguments.pop("amplitudes")
        observers = arguments.pop("observers")
        schedule = arguments.pop("schedule")
        return MeasurementScenario(amplitudes, observers, schedule, **arguments)

    @property
    def name(self) -> str:
        """Human-readable scenario name."""
        return self._name

    @property
    def amplitudes(self) -> NDArray[np.complex128]:
        """Read-only S amplitudes ``a_i``."""
        return self._amplitudes

    @property
    def weights(self) -> NDArray[np.float64]:
        """Born weights ``|a_i|²``."""
        return np.abs(self._amplitudes) ** 2

    @property
    def outcome_count(self) -> int:
        """Dimension of S (number of outcomes)."""
        return int(self._amplitudes.shape[0])

    @property
    def is_binary(self) -> bool:
        """True for a two-level S."""
        return self.outcome_count == 2

    @property
    def observers(self) -> Tuple[Observer, ...]:
        """Resolved observers in declaration order."""
        return self._observers

    def observer(self, label: str) -> Observer:
        """Return the observer called ``label``.

        Raises:
            ArgumentError: If no such observer exists.
        """
        for observer in self._observers:
            if observer.label == label:
                return observer
        raise ArgumentError(f"Unknown observer {label!r}")

    @property
    def schedule(self) -> InteractionSchedule:
        """The interaction schedule."""
        return self._schedule

    @property
    def system_label(self) -> str:
        """Layout label of S."""
        return self._system_label

    @property
    def s_final_map(self) -> Optional[NDArray[np.complex128]]:
        """Optional unitary on S giving ``|s_i^f> = F|s_i>``."""
        return self._s_final_map

    @property
    def final_basis(self) -> NDArray[np.complex128]:
        """Matrix whose column ``i`` is ``|s_{i+1}^f>``."""
        if self._s_final_map is None:
            return np.eye(self.outcome_count, dtype=np.complex128)
        return self._s_final_map

    @property
    def pointer_df_count(self) -> int:
        """Cells per observer pointer."""
        return self._pointer_df_count

    @property
    def input_kind(self) -> InputKind:
        """Pure or mixed S input."""
        return self._input_kind

    @property
    def interaction_mode(self) -> InteractionMode:
        """Whole-unitary or continuous-time interaction steps."""
        return self._interaction_mode

    @property
    def time_step(self) -> Optional[float]:
        """Integration step of the continuous mode."""
        return self._time_step

    @property
    def free_terms(self) -> Tuple[HamiltonianTerm, ...]:
        """Terms of the free Hamiltonian."""
        return self._free_terms

    @property
    def interaction_terms(self) -> Dict[str, Tuple[HamiltonianTerm, ...]]:
        """User-supplied interaction Hamiltonian terms, per observer."""
        return dict(self._interaction_terms)

    @property
    def max_dimension(self) -> int:
        """Dimension cap the scenario was validated against."""
        return self._max_dimension

    @property
    def layout(self) -> SubsystemLayout:
        """``S`` followed by every observer's cells."""
        return self._layout

    def free_hamiltonian(self) -> Operator:
        """The free Hamiltonian on the full layout (zero when none is given)."""
        return _sum_terms(self._free_terms, self._layout)

    def interaction_hamiltonian(self, label: str) -> Optional[Operator]:
        """User-supplied ``Ĥ_I`` of an observer, or ``None``."""
        self.observer(label)
        terms = self._interaction_terms.get(label)
        if not terms:
            return None
        return _sum_terms(terms, self._layout)


def _embed_system(scenario: MeasurementScenario, matrix: ArrayLike) -> Operator:
    label = scenario.system_label
    local = SubsystemLayout([(label, scenario.outcome_count)])
    return embed(Operator(matrix, local), scenario.layout)


def _ready_rest(scenario: MeasurementScenario) -> NDArray[np.complex128]:
    rest = scenario.layout.total_dimension // scenario.outcome_count
    ready = np.zeros(rest, dtype=np.complex128)
    ready[0] = 1.0
    return ready


def build_initial_state(
    scenario: MeasurementScenario,
) -> Union[StateVector, DensityMatrix]:
    """
    Return the state before any interaction.

    Pure input: ``(Σ a_i|s_i>) ⊗ |O_0> ⊗ |O'_0> ...``. Mixed input:
    ``Σ |a_i|² |s_i><s_i| ⊗`` ready projectors.
    """
    ready = _ready_rest(scenario)
    if scenario.input_kind is InputKind.PURE:
        return StateVector(np.kron(scenario.amplitudes, ready), scenario.layout)
    system = np.diag(scenario.weights).astype(np.complex128)
    return DensityMatrix(np.kron(system, np.outer(ready, ready)), scenario.layout)


def first_interacting_observer(scenario: MeasurementScenario) -> str:
    """Label of the observer whose interact step comes first in the schedule.

    Falls back to the first declared observer when nothing interacts.
    """
    for step in scenario.schedule:
        if step.kind is StepKind.INTERACT and step.observer is not None:
            return step.observer
    return scenario.observers[0].label


def build_premeasurement_unitary(
    scenario: MeasurementScenario,
    observer: str,
    maps_system: Optional[bool] = None,
) -> Operator:
    """
    Return the von Neumann pre-measurement unitary of ``observer``.

    Every cell of the observer is shifted cyclically by ``i + 1`` (mod ``d + 1``)
    when S is in its ``i``-th basis state, so ``|s_i>|O_0> → |s_i>|O_i>``; the
    map is a permutation, hence unitary on the whole space including the
    states the dynamics never visits. The observer that meets S in its initial
    basis also maps S to the final basis, ``|s_i> → |s_i^f>``; an observer
    interacting after that is conditioned on the final basis and leaves S
    untouched. Other observers' factors are unaffected.

    Args:
        scenario: Scenario holding the observer.
        observer: Label of the observer.
        maps_system: Whether S is still in its initial basis. By default this
            holds for the first observer to interact in the schedule.
    """
    target = scenario.observer(observer)
    layout = scenario.layout
    modulus = target.dimension
    shift = layout.digits(scenario.system_label) + 1

    digits = list(np.unravel_index(np.arange(layout.total_dimension), layout.dims))
    for cell in target.cells:
        position = layout.position(cell)
        digits[position] = (digits[position] + shift) % modulus
    image = np.ravel_multi_index(tuple(digits), layout.dims)

    permutation = np.zeros((layout.total_dimension,) * 2, dtype=np.complex128)
    permutation[image, np.arange(layout.total_dimension)] = 1.0

    if scenario.s_final_map is None:
        return Operator(permutation, layout, OperatorKind.UNITARY)
    final = _embed_system(scenario, scenario.s_final_map).entries
    if maps_system is None:
        maps_system = target.label == first_interacting_observer(scenario)
    if maps_system:
        matrix = final @ permutation
    else:
        matrix = final @ permutation @ final.conj().T
    return Operator(matrix, layout, OperatorKind.UNITARY)


def build_reversal_unitary(unitary: Operator) -> Operator:
    """
    Return ``U†``, the operation undoing ``U``.

    Raises:
        ArgumentError: If ``U`` is not a unitary operator.
    """
    if unitary.kind is not OperatorKind.UNITARY or not unitary.is_unitary():
        raise ArgumentError("Only unitary operators can be reversed")
    return unitary.adjoint()


def _require_binary(scenario: MeasurementScenario, what: str) -> None:
    if not scenario.is_binary:
        raise UnsupportedScenarioError(
            f"{what} needs a binary S, got {scenario.outcome_count} levels"
        )


def build_interference_observable(
    scenario: MeasurementScenario, observer: Optional[str] = None
) -> Operator:
    """
    Return ``B = |O_1><O_2| ⊗ |s_1^f><s_2^f| + h.c.`` (identity elsewhere).

    Args:
        scenario: Binary scenario.
        observer: Designated observer; the first one by default.

    Raises:
        UnsupportedScenarioError: If S is not binary.
    """
    _require_binary(scenario, "The interference observable")
    target = scenario.observer(observer or scenario.observers[0].label)
    layout = scenario.layout
    local = layout.restrict((scenario.system_label,) + target.cells)
    final = scenario.final_basis

    # |s_i^f>|O_i> on the S ⊗ O block, with S leading as in the layout.
    first = np.kron(final[:, 0], target.pointer_ket(layout, 1))
    second = np.kron(final[:, 1], target.pointer_ket(layout, 2))
    block = np.outer(first, second.conj())
    return embed(
        Operator(block + block.conj().T, local, OperatorKind.HERMITIAN), layout
    )


def system_coherence_observable(scenario: MeasurementScenario) -> Operator:
    """Return ``|s_1^f><s_2^f| + h.c.`` acting on S alone."""
    _require_binary(scenario, "The S coherence observable")
    final = scenario.final_basis
    block = np.outer(final[:, 0], final[:, 1].conj())
    label = scenario.system_label
    local = SubsystemLayout([(label, 2)])
    operator = Operator(block + block.conj().T, local, OperatorKind.HERMITIAN)
    return embed(operator, scenario.layout)


def build_two_observer_chain(
    scenario: MeasurementScenario,
) -> Tuple[Operator, Operator]:
    """
    Return ``(U_O, U_O′)`` for the two observers, in declaration order.

    Raises:
        UnsupportedScenarioError: If the scenario does not have two observers.
    """
    if len(scenario.observers) != 2:
        raise UnsupportedScenarioError(
            f"A two-observer chain needs 2 observers, got {len(scenario.observers)}"
        )
    first, second = scenario.observers
    return (
        build_premeasurement_unitary(scenario, first.label),
        build_premeasurement_unitary(scenario, second.label),
    )


def expand_pointer_dfs(
    scenario: MeasurementScenario, count: int
) -> MeasurementScenario:
    """
    Replicate every observer pointer over ``count`` cells.

    The pre-measurement unitary then excites all cells of a branch together
    and pointer projectors require every cell to agree.

    Raises:
        ArgumentError: If ``count < 1``.
        UnsupportedScenarioError: If Hamiltonian terms act on observer cells.
        CapacityError: If the expanded layout exceeds the scenario's cap.
    """
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ArgumentError(f"Cell count must be a positive integer, got {count!r}")
    cells = {cell for o in scenario.observers for cell in o.cells}
    for term in scenario.free_terms + tuple(
        t for terms in scenario.interaction_terms.values() for t in terms
    ):
        if cells.intersection(term.factors):
            raise UnsupportedScenarioError(
                "Cannot expand pointers carrying explicit Hamiltonian terms"
            )
    return scenario.replace(pointer_df_count=count)


def pointer_projector(
    scenario: MeasurementScenario, observer: str, index: int
) -> Operator:
    """Return ``P̂^O_j`` on the scenario layout."""
    return scenario.observer(observer).projector(scenario.layout, index)


def pointer_observable(scenario: MeasurementScenario, observer: str) -> Operator:
    """Return ``Q_O = Σ_j q^O_j P̂^O_j`` (the ready state reads 0)."""
    target = scenario.observer(observer)
    layout = scenario.layout
    diagonal = np.zeros(layout.total_dimension, dtype=np.complex128)
    for index in range(1, target.dimension):
        diagonal[target.mask(layout, index)] = target.eigenvalue(index)
    return Operator(np.diag(diagonal), layout, OperatorKind.HERMITIAN)


def branch_state(
    scenario: MeasurementScenario, observer: str, outcome: int
) -> StateVector:
    """Return ``|s_i^f>|O_i>`` with every other observer ready (``i`` is 1-based)."""
    target = scenario.observer(observer)
    if not 1 <= outcome <= scenario.outcome_count:
        raise ArgumentError(
            f"Outcome {outcome} out of range 1..{scenario.outcome_count}"
        )
    layout = scenario.layout
    indices = {cell: outcome for cell in target.cells}
    pointer = StateVector.basis(layout.restrict(layout.labels[1:]), indices)
    return StateVector(
        np.kron(scenario.final_basis[:, outcome - 1], pointer.amplitudes), layout
    )


def build_mixed_final_state(
    scenario: MeasurementScenario, observer: Optional[str] = None
) -> DensityMatrix:
    """Return the outcome mixture ``Σ |a_i|² |s_i^f><s_i^f| ⊗ |O_i><O_i|``."""
    label = observer or scenario.observers[0].label
    branches = [
        branch_state(scenario, label, i).to_density_matrix().entries
        for i in range(1, scenario.outcome_count + 1)
    ]
    total = sum(w * b for w, b in zip(scenario.weights, branches))
    return DensityMatrix(total, scenario.layout)
