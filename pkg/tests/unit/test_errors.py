"""tests/unit/test_errors.py"""

import pytest

from doublet.errors import (
    ArgumentError,
    CapacityError,
    CompositionError,
    DegenerateDistributionError,
    DoubletError,
    LayoutError,
    NumericalConsistencyError,
    ScenarioError,
    UnsupportedScenarioError,
)


def test_doublet_error_is_base():
    with pytest.raises(DoubletError):
        raise DoubletError("Generic error")


@pytest.mark.parametrize(
    "error, builtin",
    [
        (ArgumentError, ValueError),
        (LayoutError, ArgumentError),
        (NumericalConsistencyError, ArithmeticError),
    ],
)
def test_builtin_bases(error, builtin):
    assert issubclass(error, builtin)
    assert issubclass(error, DoubletError)


@pytest.mark.parametrize(
    "error, default",
    [
        (ArgumentError, "Invalid argument"),
        (LayoutError, "Invalid subsystem layout"),
        (NumericalConsistencyError, "Numerical consistency check failed"),
        (UnsupportedScenarioError, "Unsupported scenario"),
        (DegenerateDistributionError, "Outcome weights are all zero"),
    ],
)
def test_default_messages(error, default):
    assert str(error()) == default
    assert str(error("custom")) == "custom"


def test_composition_error_lists_labels():
    error = CompositionError(("S", "O"))
    assert error.labels == ("S", "O")
    assert "S, O" in str(error)
    assert str(CompositionError()) == "Factor labels clash in tensor product"


def test_capacity_error_keeps_sizes():
    error = CapacityError(8192, 4096)
    assert (error.dimension, error.cap) == (8192, 4096)
    assert "8192" in str(error)


def test_scenario_error_prefix():
    assert str(ScenarioError("E_NORM", "bad")) == "[E_NORM] bad"
    error = ScenarioError("E_SCHED", "overlap", 7)
    assert str(error) == "[E_SCHED] line 7: overlap"
    assert (error.code, error.detail, error.line) == ("E_SCHED", "overlap", 7)


def test_scenario_error_at_line():
    error = ScenarioError("E_SCHEMA", "missing")
    anchored = error.at_line(3)
    assert anchored.line == 3
    assert anchored.detail == "missing"
    assert anchored.at_line(9) is anchored
    assert error.at_line(None) is error
