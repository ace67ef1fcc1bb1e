"""tests/unit/test_constants.py"""

import math

import pytest

from doublet.constants import (
    DEFAULT_EVENTS,
    DEFAULT_SEED,
    EPS_BRANCH,
    EPS_NORM,
    EPS_ORACLE,
    EXIT_CLAIM_FAILED,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    MAX_SEED,
    READY_INDEX,
    binomial_sigma,
    validate_seed,
)


class TestSeeds:
    """Master seed validation."""

    @pytest.mark.parametrize("seed", [0, 1, DEFAULT_SEED, MAX_SEED])
    def test_accepts_64_bit_seeds(self, seed):
        assert validate_seed(seed) == seed

    @pytest.mark.parametrize("seed", [-1, MAX_SEED + 1, 1.5, "42", True, None])
    def test_rejects_other_values(self, seed):
        with pytest.raises(ValueError):
            validate_seed(seed)


class TestBinomialSigma:
    """Standard error of Monte Carlo frequencies."""

    def test_value(self):
        assert binomial_sigma(0.36, 100_000) == pytest.approx(
            math.sqrt(0.36 * 0.64 / 100_000)
        )

    @pytest.mark.parametrize("probability", [0.0, 1.0])
    def test_degenerate_probabilities(self, probability):
        assert binomial_sigma(probability, 1000) == 0.0


class TestConstants:
    """Fixed values the rest of the package relies on."""

    def test_tolerances_are_ordered(self):
        assert EPS_ORACLE < EPS_BRANCH < EPS_NORM

    def test_defaults(self):
        assert DEFAULT_EVENTS == 100_000
        assert DEFAULT_SEED == 42
        assert READY_INDEX == 0

    def test_exit_codes(self):
        assert (EXIT_OK, EXIT_INPUT_ERROR, EXIT_CLAIM_FAILED) == (0, 1, 2)
