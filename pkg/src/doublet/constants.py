"""src/doublet/constants.py"""

# Tolerance for norm, trace, hermiticity and unitarity checks
EPS_NORM = 1e-9

# Tolerance for comparisons against brute-force index-loop oracles
EPS_ORACLE = 1e-12

# Block-norm threshold below which a Hamiltonian does not couple pointer branches
EPS_BRANCH = 1e-10

# Amplitude normalization slack accepted when parsing scenario files
EPS_PARSE_NORM = 1e-6

# Monte Carlo verdicts pass within this many binomial standard errors
MONTE_CARLO_SIGMAS = 4.0

# Largest total Hilbert dimension a scenario may reach
MAX_TOTAL_DIMENSION = 4096

# Events replayed step by step (full dynamics per event) inside experiments
REPLAY_EVENTS = 1000

# Batch defaults
DEFAULT_EVENTS = 100_000
DEFAULT_SEED = 42
DEFAULT_OUTPUT_DIR = "doublet-out"

# Index of the ready state |O_0> in every observer factor
READY_INDEX = 0

# Scenario / report schema version written to and required from files
SCHEMA_VERSION = 1

# Scenario diagnostic codes
E_SCHEMA = "E_SCHEMA"
E_NORM = "E_NORM"
E_SCHED = "E_SCHED"

# Environment variables overriding batch defaults
ENV_SEED = "DOUBLET_SEED"
ENV_OUTPUT_DIR = "DOUBLET_OUT"

# Report formats understood by the CLI
REPORT_FORMATS = ("yaml", "json")

# CLI exit statuses
EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_CLAIM_FAILED = 2

# Seeds are 64-bit unsigned integers
MAX_SEED = 2**64 - 1


def validate_seed(seed: int) -> int:
    """Check that a master seed fits in 64 unsigned bits.

    Args:
        seed (int): Candidate seed.

    Returns:
        int: The same seed.

    Raises:
        ValueError: If the seed is negative, too large or not an integer.
    """
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ValueError(f"Seed must be int, got {type(seed).__name__}")
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"Seed {seed} outside [0, 2**64)")
    return seed


def binomial_sigma(probability: float, events: int) -> float:
    """Return the binomial standard error of a frequency estimate.

    Args:
        probability (float): Expected probability of the counted outcome.
        events (int): Number of independent events.

    Returns:
        float: ``sqrt(p (1 - p) / N)``; zero for degenerate probabilities.
    """
    p = min(max(probability, 0.0), 1.0)
    if events <= 0:
        return 0.0
    return float((p * (1.0 - p) / events) ** 0.5)
