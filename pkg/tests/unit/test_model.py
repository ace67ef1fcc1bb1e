"""tests/unit/test_model.py"""

import math

import numpy as np
import pytest

from doublet.constants import E_NORM, E_SCHED, E_SCHEMA
from doublet.core.dual import pointer_distribution
from doublet.core.hilbert import (
    DensityMatrix,
    Operator,
    OperatorKind,
    StateVector,
    apply_unitary,
    expectation,
)
from doublet.core.model import (
    HamiltonianTerm,
    InputKind,
    InteractionSchedule,
    MeasurementScenario,
    Observer,
    ScheduleStep,
    StepKind,
    branch_state,
    build_initial_state,
    build_interference_observable,
    build_mixed_final_state,
    build_premeasurement_unitary,
    build_reversal_unitary,
    build_two_observer_chain,
    expand_pointer_dfs,
    first_interacting_observer,
    pointer_observable,
    pointer_projector,
    system_coherence_observable,
)
from doublet.errors import (
    ArgumentError,
    CapacityError,
    ScenarioError,
    UnsupportedScenarioError,
)
from tests.scenarios import make_scenario

HADAMARD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


# ==== SCHEDULE ====


def test_sequential_schedule_and_boundaries():
    schedule = InteractionSchedule.sequential(
        [("interact", "O"), "free", ("interact", "P")], duration=0.5
    )
    assert len(schedule) == 3
    assert schedule[1].kind is StepKind.FREE
    assert schedule.pattern() == (("interact", "O"), ("interact", "P"))
    assert schedule.boundaries() == {"t0": 0.0, "t1": 0.5, "t2": 1.0}


def test_overlapping_steps_are_rejected():
    first = ScheduleStep(StepKind.INTERACT, 0.0, 1.0, "O")
    second = ScheduleStep(StepKind.INTERACT, 0.5, 1.5, "O")
    with pytest.raises(ScenarioError) as exc_info:
        InteractionSchedule([first, second])
    assert exc_info.value.code == E_SCHED


def test_touching_steps_are_allowed():
    first = ScheduleStep(StepKind.INTERACT, 0.0, 1.0, "O")
    second = ScheduleStep(StepKind.REVERSE, 1.0, 2.0, "O")
    assert len(InteractionSchedule([first, second])) == 2


@pytest.mark.parametrize(
    "kind, start, end, observer, code",
    [
        ("jump", 0.0, 1.0, "O", E_SCHEMA),
        ("interact", 1.0, 1.0, "O", E_SCHED),
        ("interact", 0.0, 1.0, None, E_SCHEMA),
        ("free", 0.0, 1.0, "O", E_SCHEMA),
        ("free", 1.0, 0.0, None, E_SCHED),
        ("interact", 0.0, math.inf, "O", E_SCHED),
    ],
)
def test_schedule_step_validation(kind, start, end, observer, code):
    with pytest.raises(ScenarioError) as exc_info:
        ScheduleStep(kind, start, end, observer)
    assert exc_info.value.code == code


def test_zero_length_free_step_is_allowed():
    assert ScheduleStep("free", 1.0, 1.0).duration == 0.0


# ==== SCENARIO ====


def test_scenario_layout_and_defaults(binary_scenario):
    assert binary_scenario.layout.labels == ("S", "O")
    assert binary_scenario.layout.dims == (2, 3)
    assert binary_scenario.is_binary
    observer = binary_scenario.observer("O")
    assert observer.dimension == 3
    assert observer.eigenvalues == (1.0, 2.0)
    assert observer.eigenvalue(0) == 0.0
    assert binary_scenario.weights == pytest.approx([0.36, 0.64])


def test_scenario_rejects_non_normalized_amplitudes():
    with pytest.raises(ScenarioError) as exc_info:
        make_scenario([("interact", "O")], amplitudes=(0.6, 0.7))
    assert exc_info.value.code == E_NORM


@pytest.mark.parametrize(
    "kwargs",
    [
        {"observers": ("O", "O")},
        {"observers": ("S",)},
        {"observers": ()},
        {"amplitudes": (1.0,)},
        {"pointer_df_count": 0},
        {"input_kind": "quantum"},
        {"interaction_mode": "continuous"},
        {"time_step": -1.0},
        {"s_final_map": np.eye(3)},
        {"s_final_map": [[1, 1], [0, 1]]},
        {"observers": (Observer("O", (1.0, 2.0, 3.0)),)},
        {"observers": (Observer("O", dimension=4),)},
    ],
)
def test_scenario_schema_violations(kwargs):
    with pytest.raises(ScenarioError) as exc_info:
        make_scenario([("interact", "O")], **kwargs)
    assert exc_info.value.code == E_SCHEMA


def test_schedule_naming_unknown_observer():
    with pytest.raises(ScenarioError) as exc_info:
        make_scenario([("interact", "X")])
    assert exc_info.value.code == E_SCHED


def test_dimension_cap():
    with pytest.raises(CapacityError) as exc_info:
        make_scenario([("interact", "O")], max_dimension=4)
    assert exc_info.value.dimension == 6


def test_hamiltonian_terms_are_validated():
    with pytest.raises(ScenarioError, match="Hermitian"):
        HamiltonianTerm(["S"], [[0, 1], [0, 0]])
    with pytest.raises(ScenarioError, match="unknown factor"):
        make_scenario(
            [("interact", "O")],
            free_hamiltonian=[HamiltonianTerm(["X"], np.eye(2))],
        )
    with pytest.raises(ScenarioError, match="3x3"):
        make_scenario(
            [("interact", "O")],
            free_hamiltonian=[HamiltonianTerm(["O"], np.eye(2))],
        )


def test_replace_and_equality(binary_scenario):
    same = binary_scenario.replace()
    assert same == binary_scenario
    mixed = binary_scenario.replace(input_kind=InputKind.MIXED)
    assert mixed != binary_scenario
    with pytest.raises(ArgumentError, match="Unknown scenario fields"):
        binary_scenario.replace(colour="red")


def test_free_and_interaction_hamiltonians(binary_scenario):
    assert not np.any(binary_scenario.free_hamiltonian().entries)
    assert binary_scenario.interaction_hamiltonian("O") is None
    with pytest.raises(ArgumentError):
        binary_scenario.interaction_hamiltonian("X")


# ==== BUILDERS ====


def test_initial_state_pure(binary_scenario):
    state = build_initial_state(binary_scenario)
    assert isinstance(state, StateVector)
    assert state.amplitudes == pytest.approx([0.6, 0, 0, 0.8, 0, 0])


def test_initial_state_mixed(binary_scenario):
    state = build_initial_state(binary_scenario.replace(input_kind="mixed"))
    assert isinstance(state, DensityMatrix)
    assert state.diagonal() == pytest.approx([0.36, 0, 0, 0.64, 0, 0])
    assert state.purity() == pytest.approx(0.36**2 + 0.64**2)


def test_premeasurement_correlates_pointer(binary_scenario):
    unitary = build_premeasurement_unitary(binary_scenario, "O")
    assert unitary.kind is OperatorKind.UNITARY
    final = apply_unitary(build_initial_state(binary_scenario), unitary)
    assert final.amplitudes == pytest.approx([0, 0.6, 0, 0, 0, 0.8])
    weights = pointer_distribution(final, binary_scenario.observer("O")).weights
    assert weights == pytest.approx([0.0, 0.36, 0.64], abs=1e-12)


def test_premeasurement_with_final_map():
    scenario = make_scenario([("interact", "O")], s_final_map=HADAMARD)
    final = apply_unitary(
        build_initial_state(scenario), build_premeasurement_unitary(scenario, "O")
    )
    expected = 0.6 * branch_state(scenario, "O", 1).amplitudes + 0.8 * branch_state(
        scenario, "O", 2
    ).amplitudes
    assert np.allclose(final.amplitudes, expected)
    observable = build_interference_observable(scenario)
    assert expectation(final, observable) == pytest.approx(0.96)


def test_reversal_restores_initial_state(binary_scenario):
    unitary = build_premeasurement_unitary(binary_scenario, "O")
    initial = build_initial_state(binary_scenario)
    restored = apply_unitary(
        apply_unitary(initial, unitary), build_reversal_unitary(unitary)
    )
    assert restored.allclose(initial, atol=1e-12)


def test_reversal_requires_unitary(binary_scenario):
    with pytest.raises(ArgumentError):
        build_reversal_unitary(Operator.zero(binary_scenario.layout))


def test_interference_observable_separates_pure_and_mixed(binary_scenario):
    unitary = build_premeasurement_unitary(binary_scenario, "O")
    observable = build_interference_observable(binary_scenario, "O")
    pure = apply_unitary(build_initial_state(binary_scenario), unitary)
    assert expectation(pure, observable) == pytest.approx(0.96, abs=1e-10)
    mixed = build_mixed_final_state(binary_scenario)
    assert abs(expectation(mixed, observable)) < 1e-12


def test_interference_observable_does_not_commute_with_pointer(binary_scenario):
    observable = build_interference_observable(binary_scenario)
    pointer = pointer_observable(binary_scenario, "O")
    assert pointer.commutator(observable).norm() > 0.1


def test_interference_observable_needs_binary_system():
    scenario = make_scenario([("interact", "O")], amplitudes=(0.6, 0.0, 0.8))
    with pytest.raises(UnsupportedScenarioError):
        build_interference_observable(scenario)
    with pytest.raises(UnsupportedScenarioError):
        system_coherence_observable(scenario)


def test_system_coherence_observable(binary_scenario):
    coherence = system_coherence_observable(binary_scenario)
    initial = build_initial_state(binary_scenario)
    assert expectation(initial, coherence) == pytest.approx(0.96)


def test_mixed_final_state(binary_scenario):
    mixed = build_mixed_final_state(binary_scenario)
    assert mixed.trace() == pytest.approx(1.0)
    assert mixed.diagonal() == pytest.approx([0, 0.36, 0, 0, 0, 0.64])


def test_pointer_projector_and_observable(binary_scenario):
    projector = pointer_projector(binary_scenario, "O", 2)
    assert projector.kind is OperatorKind.PROJECTOR
    assert np.diag(projector.entries).real.tolist() == [0, 0, 1, 0, 0, 1]
    q = pointer_observable(binary_scenario, "O")
    assert np.diag(q.entries).real.tolist() == [0, 1, 2, 0, 1, 2]


def test_branch_state_range(binary_scenario):
    with pytest.raises(ArgumentError):
        branch_state(binary_scenario, "O", 0)
    with pytest.raises(ArgumentError):
        branch_state(binary_scenario, "O", 3)


def test_two_observer_chain(two_observer_scenario, binary_scenario):
    first, second = build_two_observer_chain(two_observer_scenario)
    state = build_initial_state(two_observer_scenario)
    final = apply_unitary(apply_unitary(state, first), second)
    # S ⊗ O ⊗ P with 2 x 3 x 3 levels: |s1 O1 P1> and |s2 O2 P2>.
    assert final.amplitudes[4] == pytest.approx(0.6)
    assert final.amplitudes[9 + 8] == pytest.approx(0.8)
    with pytest.raises(UnsupportedScenarioError):
        build_two_observer_chain(binary_scenario)


# ==== MANY POINTER CELLS ====


def test_expand_pointer_dfs_keeps_distributions(binary_scenario):
    expanded = expand_pointer_dfs(binary_scenario, 3)
    observer = expanded.observer("O")
    assert observer.cells == ("O.1", "O.2", "O.3")
    assert expanded.layout.total_dimension == 2 * 27
    final = apply_unitary(
        build_initial_state(expanded), build_premeasurement_unitary(expanded, "O")
    )
    weights = pointer_distribution(final, observer).weights
    assert np.max(np.abs(weights - np.array([0.0, 0.36, 0.64]))) < 1e-12


def test_expand_pointer_dfs_interference_unchanged(binary_scenario):
    expanded = expand_pointer_dfs(binary_scenario, 2)
    final = apply_unitary(
        build_initial_state(expanded), build_premeasurement_unitary(expanded, "O")
    )
    observable = build_interference_observable(expanded)
    assert expectation(final, observable) == pytest.approx(0.96, abs=1e-10)


def test_expand_pointer_dfs_single_cell_is_identity(binary_scenario):
    assert expand_pointer_dfs(binary_scenario, 1) == binary_scenario


def test_expand_pointer_dfs_rejects_bad_counts(binary_scenario):
    with pytest.raises(ArgumentError):
        expand_pointer_dfs(binary_scenario, 0)


def test_expand_pointer_dfs_rejects_terms_on_cells():
    scenario = make_scenario(
        [("interact", "O")],
        free_hamiltonian=[HamiltonianTerm(["O"], np.eye(3))],
    )
    with pytest.raises(UnsupportedScenarioError):
        expand_pointer_dfs(scenario, 2)


@pytest.mark.parametrize("factors", [["O.1"], ["S", "O.2"]])
def test_cell_terms_rejected_with_many_cells(factors):
    size = 3 if len(factors) == 1 else 6
    with pytest.raises(ScenarioError) as info:
        make_scenario(
            [("interact", "O")],
            pointer_df_count=2,
            free_hamiltonian=[HamiltonianTerm(factors, np.eye(size))],
        )
    assert info.value.code == E_SCHEMA


def test_first_interacting_observer():
    scenario = make_scenario(
        ["free", ("interact", "P"), ("interact", "O")], observers=("O", "P")
    )
    assert first_interacting_observer(scenario) == "P"
    quiet = make_scenario(["free"], observers=("O", "P"))
    assert first_interacting_observer(quiet) == "O"
