"""tests/conftest.py"""

import pytest

from tests.scenarios import SCENARIO_YAML, make_scenario


@pytest.fixture
def binary_scenario():
    return make_scenario([("interact", "O")], name="standard")


@pytest.fixture
def undoing_scenario():
    return make_scenario(
        [("interact", "O"), ("reverse", "O"), ("interact", "O")], name="undoing"
    )


@pytest.fixture
def two_observer_scenario():
    return make_scenario(
        [("interact", "O"), ("interact", "P")],
        observers=("O", "P"),
        name="two-observer",
    )


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "standard.yaml"
    path.write_text(SCENARIO_YAML, encoding="utf-8")
    return path
