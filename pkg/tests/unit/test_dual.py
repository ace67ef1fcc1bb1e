"""tests/unit/test_dual.py"""

import numpy as np
import pytest

from doublet.constants import MONTE_CARLO_SIGMAS, binomial_sigma
from doublet.core.dual import (
    DualEngine,
    DualState,
    EventRecord,
    OutcomeDistribution,
    PointerRecord,
    compile_schedule,
    identity_guard,
    joint_distribution,
    pointer_distribution,
    pointer_trajectory,
    restricted_state_event,
    restricted_state_statistical,
    sample_outcome,
    statistical_dual_state,
    step,
    transition_probability,
)
from doublet.core.hilbert import Operator, OperatorKind, StateVector
from doublet.core.model import (
    HamiltonianTerm,
    build_initial_state,
    build_premeasurement_unitary,
    first_interacting_observer,
)
from doublet.errors import (
    ArgumentError,
    DegenerateDistributionError,
    NumericalConsistencyError,
)
from tests.scenarios import make_scenario

SIGMA_Z = np.diag([1.0, -1.0])
POINTER_HOP = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=float)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def _free_scenario(matrix, factor, free_steps=1, **kw):
    entries = [("interact", "O")] + ["free"] * free_steps
    return make_scenario(
        entries, free_hamiltonian=[HamiltonianTerm([factor], matrix)], **kw
    )


# ==== RECORDS ====


def test_pointer_record_defaults_to_ready(binary_scenario):
    record = PointerRecord(binary_scenario.observer("O"))
    assert record.is_ready
    assert record.value == 0.0
    assert record.with_index(2).value == 2.0
    assert record.observer_label == "O"
    assert record.dimension == 3


@pytest.mark.parametrize("index", [-1, 3, True, 1.0])
def test_pointer_record_rejects_bad_index(binary_scenario, index):
    with pytest.raises(ArgumentError):
        PointerRecord(binary_scenario.observer("O"), index)


def test_dual_state_initial(binary_scenario):
    dual = DualState.initial(binary_scenario)
    assert dual.outcome_indices() == {"O": 0}
    assert isinstance(dual.dynamical, StateVector)
    with pytest.raises(ArgumentError):
        dual.record("P")


def test_dual_state_rejects_duplicates_and_foreign_records(
    binary_scenario, two_observer_scenario
):
    state = build_initial_state(binary_scenario)
    observer = binary_scenario.observer("O")
    with pytest.raises(ArgumentError, match="Two records"):
        DualState(state, [PointerRecord(observer), PointerRecord(observer, 1)])
    with pytest.raises(ArgumentError, match="missing"):
        DualState(state, [PointerRecord(two_observer_scenario.observer("P"))])


def test_dual_state_needs_a_record_per_observer(two_observer_scenario):
    state = build_initial_state(two_observer_scenario)
    only_first = PointerRecord(two_observer_scenario.observer("O"))
    with pytest.raises(ArgumentError, match="have no record"):
        DualState(state, [only_first])


def test_dual_state_with_record_keeps_dynamics(binary_scenario):
    dual = DualState.initial(binary_scenario)
    changed = dual.with_record(dual.record("O").with_index(1))
    assert changed.dynamical is dual.dynamical
    assert changed.record("O").outcome_index == 1
    assert dual.record("O").is_ready


# ==== DISTRIBUTIONS ====


def test_outcome_distribution_clamps_tiny_excursions():
    dist = OutcomeDistribution([-1e-12, 0.36, 0.64 + 1e-12])
    assert dist[0] == 0.0
    assert dist.ready == 0.0
    assert len(dist) == 3
    assert dist.cumulative()[-1] == 1.0


@pytest.mark.parametrize(
    "weights, error",
    [
        ([0.0, 0.0], DegenerateDistributionError),
        ([0.5, 0.4], NumericalConsistencyError),
        ([1.5, -0.5], NumericalConsistencyError),
        ([np.nan, 1.0], NumericalConsistencyError),
        ([[0.5, 0.5]], ArgumentError),
        ([], ArgumentError),
    ],
)
def test_outcome_distribution_validation(weights, error):
    with pytest.raises(error):
        OutcomeDistribution(weights)


def test_sample_outcome_consumes_one_uniform():
    first = np.random.default_rng(3)
    second = np.random.default_rng(3)
    sample_outcome([0.0, 0.36, 0.64], first)
    second.random()
    assert first.random() == second.random()


def test_sample_outcome_certain_and_impossible_indices():
    rng = np.random.default_rng(0)
    assert {sample_outcome([0.0, 1.0, 0.0], rng) for _ in range(200)} == {1}
    with pytest.raises(DegenerateDistributionError):
        sample_outcome([0.0, 0.0, 0.0], rng)


def test_sample_outcome_frequencies():
    rng = np.random.default_rng(11)
    draws = 20_000
    counts = np.bincount(
        [sample_outcome([0.0, 0.36, 0.64], rng) for _ in range(draws)], minlength=3
    )
    assert counts[0] == 0
    tolerance = MONTE_CARLO_SIGMAS * binomial_sigma(0.36, draws)
    assert abs(counts[1] / draws - 0.36) <= tolerance


def test_pointer_distribution_after_interaction(binary_scenario):
    unitary = build_premeasurement_unitary(binary_scenario, "O")
    final = unitary.entries @ build_initial_state(binary_scenario).amplitudes
    state = StateVector(final, binary_scenario.layout)
    dist = pointer_distribution(state, binary_scenario.observer("O"))
    assert dist.allclose([0.0, 0.36, 0.64], atol=1e-12)


# ==== IDENTITY GUARD ====


def test_identity_guard(binary_scenario):
    observer = binary_scenario.observer("O")
    layout = binary_scenario.layout
    assert identity_guard(Operator.zero(layout), observer)
    on_system = HamiltonianTerm(["S"], SIGMA_Z).to_operator(layout)
    assert identity_guard(on_system, observer)
    hop = HamiltonianTerm(["O"], POINTER_HOP).to_operator(layout)
    assert not identity_guard(hop, observer)


def test_identity_guard_sees_disagreeing_cells():
    scenario = make_scenario([("interact", "O")], pointer_df_count=2)
    observer = scenario.observer("O")
    layout = scenario.layout
    on_system = HamiltonianTerm(["S"], SIGMA_Z).to_operator(layout)
    assert identity_guard(on_system, observer)
    # Moves |1,1> to |2,1>: no agreeing branch is reached, the record still breaks.
    hop = HamiltonianTerm(["O.1"], 0.7 * POINTER_HOP).to_operator(layout)
    assert not identity_guard(hop, observer)


# ==== COMPILATION ====


def test_compile_single_interaction(binary_scenario):
    (compiled,) = compile_schedule(binary_scenario)
    assert compiled.step_id == "0:interact"
    assert compiled.substeps == 1
    assert [o.label for o in compiled.resample] == ["O"]
    assert compiled.unitary == build_premeasurement_unitary(binary_scenario, "O")


def test_compile_reverse_uses_adjoint(undoing_scenario):
    first, reverse, second = compile_schedule(undoing_scenario)
    assert reverse.step_id == "1:reverse"
    assert np.allclose(reverse.unitary.entries, first.unitary.entries.conj().T)
    assert second.unitary == first.unitary


def test_final_map_follows_the_first_interaction():
    scenario = make_scenario(
        [("interact", "P"), ("interact", "O")],
        observers=("O", "P"),
        s_final_map=HADAMARD,
    )
    assert first_interacting_observer(scenario) == "P"
    engine = DualEngine(scenario)
    first, second = scenario.observers
    after_first = engine.dynamical_after(1)
    assert pointer_distribution(after_first, second).allclose([0.0, 0.36, 0.64])
    final = engine.final_dynamical
    assert pointer_distribution(final, first).allclose([0.0, 0.36, 0.64])
    joint = joint_distribution(final, second, first)
    assert np.allclose(joint, np.diag([0.0, 0.36, 0.64]), atol=1e-12)


def test_compile_supplied_interaction_hamiltonian():
    scenario = make_scenario(
        [("interact", "O")],
        interaction_hamiltonians={"O": [HamiltonianTerm(["O"], POINTER_HOP)]},
    )
    (compiled,) = compile_schedule(scenario)
    assert compiled.hamiltonian is not None
    assert compiled.unitary.kind is OperatorKind.UNITARY


def test_compile_continuous_mode_slices_the_window(binary_scenario):
    scenario = binary_scenario.replace(interaction_mode="continuous", time_step=0.25)
    (compiled,) = compile_schedule(scenario)
    assert compiled.substeps == 4
    assert compiled.times.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert compiled.unitary.allclose(build_premeasurement_unitary(scenario, "O"))


def test_free_step_resampling_follows_identity_guard():
    quiet = compile_schedule(_free_scenario(SIGMA_Z, "S"))
    assert quiet[1].resample == ()
    coupled = compile_schedule(_free_scenario(POINTER_HOP, "O"))
    assert [o.label for o in coupled[1].resample] == ["O"]


def test_pointer_trajectory_in_continuous_mode(binary_scenario):
    scenario = binary_scenario.replace(interaction_mode="continuous", time_step=0.25)
    (compiled,) = compile_schedule(scenario)
    points = pointer_trajectory(
        build_initial_state(scenario), compiled, scenario.observer("O")
    )
    assert [t for t, _ in points] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert points[0][1].ready == pytest.approx(1.0)
    assert points[-1][1].allclose([0.0, 0.36, 0.64])


# ==== STEP & RESTRICTED STATES ====


def test_step_draws_a_record(binary_scenario):
    (compiled,) = compile_schedule(binary_scenario)
    dual = step(DualState.initial(binary_scenario), compiled, np.random.default_rng(1))
    assert dual.record("O").outcome_index in (1, 2)


def test_restricted_states(binary_scenario):
    engine = DualEngine(binary_scenario)
    observer = binary_scenario.observer("O")
    statistical = restricted_state_statistical(engine.final_dynamical, observer)
    assert np.allclose(statistical.entries, np.diag([0.0, 0.36, 0.64]))
    _, duals = engine.replay(0)
    event = restricted_state_event(duals[-1], "O")
    index = duals[-1].record("O").outcome_index
    assert event.entries[index, index] == 1.0
    assert event.purity() == pytest.approx(1.0)


def test_transition_probability(binary_scenario):
    layout = binary_scenario.layout
    unitary = build_premeasurement_unitary(binary_scenario, "O")
    start = StateVector.basis(layout, {"S": 1})
    assert transition_probability(
        unitary, start, StateVector.basis(layout, {"S": 1, "O": 2})
    ) == pytest.approx(1.0)
    with pytest.raises(ArgumentError):
        transition_probability(Operator.zero(layout), start, start)


def test_statistical_dual_state(two_observer_scenario):
    engine = DualEngine(two_observer_scenario)
    stat = statistical_dual_state(
        engine.final_dynamical, two_observer_scenario.observers
    )
    assert stat.distribution("P").allclose([0.0, 0.36, 0.64])
    with pytest.raises(ArgumentError):
        stat.distribution("Q")


def test_joint_distribution_is_diagonal(two_observer_scenario):
    engine = DualEngine(two_observer_scenario)
    first, second = two_observer_scenario.observers
    joint = joint_distribution(engine.final_dynamical, first, second)
    assert np.allclose(joint, np.diag([0.0, 0.36, 0.64]), atol=1e-12)
    with pytest.raises(ArgumentError):
        joint_distribution(engine.final_dynamical, first, first)


# ==== ENGINE ====


def test_events_are_reproducible(binary_scenario):
    engine = DualEngine(binary_scenario, master_seed=42)
    again = DualEngine(binary_scenario, master_seed=42)
    assert engine.run(50) == again.run(50)
    assert engine.event(17) == engine.run(1, start=17)[0]


def test_seed_changes_records(binary_scenario):
    left = DualEngine(binary_scenario, master_seed=1).run(50)
    right = DualEngine(binary_scenario, master_seed=2).run(50)
    assert [r.records for r in left] != [r.records for r in right]


def test_replay_matches_fast_path(undoing_scenario):
    engine = DualEngine(undoing_scenario, master_seed=7)
    assert engine.replay_consistent(100)
    record, duals = engine.replay(3)
    assert len(duals) == 4
    assert record.outcome("1:reverse", "O") == 0


def test_event_record_contents(binary_scenario):
    record = DualEngine(binary_scenario, master_seed=9).event(0)
    assert record.event_index == 0
    assert record.rng_seed == 9
    index = record.records["O"]
    assert record.step_outcomes == (("0:interact", "O", index),)
    assert record.scalars["q.O"] == float(index)
    assert record.outcomes_of("O") == (index,)
    with pytest.raises(ArgumentError):
        record.outcome("5:free", "O")


def test_event_record_dict_form(binary_scenario):
    record = DualEngine(binary_scenario).event(4)
    data = record.to_dict()
    assert set(data) == {"event_index", "seed", "outcomes", "records", "scalars"}
    assert EventRecord.from_dict(data) == record


def test_run_in_worker_processes(binary_scenario):
    engine = DualEngine(binary_scenario, master_seed=5)
    assert engine.run(12, workers=2) == engine.run(12)


@pytest.mark.parametrize(
    "kwargs", [{"events": -1}, {"events": 3, "start": -1}, {"events": 3, "workers": 0}]
)
def test_run_rejects_bad_ranges(binary_scenario, kwargs):
    with pytest.raises(ArgumentError):
        DualEngine(binary_scenario).run(**kwargs)


def test_engine_rejects_bad_seed(binary_scenario):
    with pytest.raises(ValueError):
        DualEngine(binary_scenario, master_seed=-1)


def test_dynamics_do_not_depend_on_records():
    scenario = make_scenario(
        [("interact", "O"), "free", ("reverse", "O")],
        free_hamiltonian=[HamiltonianTerm(["S"], SIGMA_Z)],
    )
    engine = DualEngine(scenario, master_seed=3)
    for index in range(20):
        _, duals = engine.replay(index)
        for position, dual in enumerate(duals):
            assert dual.dynamical == engine.dynamical_after(position)


def test_records_survive_branch_diagonal_free_evolution():
    scenario = _free_scenario(SIGMA_Z, "S", free_steps=10)
    engine = DualEngine(scenario, master_seed=21)
    for record in engine.run(1000):
        assert len(record.step_outcomes) == 1
        assert record.records["O"] == record.outcome("0:interact", "O")


def test_branch_coupling_free_evolution_resamples():
    engine = DualEngine(_free_scenario(POINTER_HOP, "O"), master_seed=21)
    record = engine.event(0)
    assert [label for _, label, _ in record.step_outcomes] == ["O", "O"]
