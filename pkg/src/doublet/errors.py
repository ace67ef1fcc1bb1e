"""src/doublet/errors.py"""

from typing import Optional, Tuple


class DoubletError(Exception):
    """Base exception class for all Doublet errors."""


class ArgumentError(DoubletError, ValueError):
    """Raised when an operation receives an invalid argument."""

    def __init__(self, message: str = "Invalid argument") -> None:
        """Initialize ArgumentError with a custom message."""
        super().__init__(message)


class LayoutError(ArgumentError):
    """Raised when a subsystem layout is malformed or layouts do not match."""

    def __init__(self, message: str = "Invalid subsystem layout") -> None:
        """Initialize LayoutError with a custom message."""
        super().__init__(message)


class CompositionError(DoubletError):
    """Raised when two operands cannot be composed with a tensor product."""

    def __init__(self, labels: Tuple[str, ...] = ()) -> None:
        """Initialize CompositionError with the clashing labels."""
        if labels:
            message = f"Factor labels clash in tensor product: {', '.join(labels)}"
        else:
            message = "Factor labels clash in tensor product"
        super().__init__(message)
        self.labels = labels


class NumericalConsistencyError(DoubletError, ArithmeticError):
    """Raised when a result that must be real or normalized is not."""

    def __init__(self, message: str = "Numerical consistency check failed") -> None:
        """Initialize NumericalConsistencyError with a custom message."""
        super().__init__(message)


class UnsupportedScenarioError(DoubletError):
    """Raised when a scenario has a shape the requested operation cannot handle."""

    def __init__(self, message: str = "Unsupported scenario") -> None:
        """Initialize UnsupportedScenarioError with a custom message."""
        super().__init__(message)


class CapacityError(DoubletError):
    """Raised when a layout would exceed the configured dimension cap."""

    def __init__(self, dimension: int, cap: int) -> None:
        """Initialize CapacityError with the requested dimension and the cap."""
        super().__init__(f"Total dimension {dimension} exceeds the cap of {cap}")
        self.dimension = dimension
        self.cap = cap


class DegenerateDistributionError(DoubletError):
    """Raised when an outcome distribution carries no probability mass."""

    def __init__(self, message: str = "Outcome weights are all zero") -> None:
        """Initialize DegenerateDistributionError with a custom message."""
        super().__init__(message)


class ScenarioError(DoubletError):
    """Raised when a measurement scenario fails validation.

    Attributes:
        code: Stable diagnostic code (``E_SCHEMA``, ``E_NORM`` or ``E_SCHED``).
        line: 1-based line of the scenario text the problem was found at, if known.
        detail: The message without the code/line prefix.
    """

    def __init__(self, code: str, detail: str, line: Optional[int] = None) -> None:
        """Initialize ScenarioError with a code, a message and an optional line."""
        prefix = f"[{code}]" if line is None else f"[{code}] line {line}:"
        super().__init__(f"{prefix} {detail}")
        self.code = code
        self.detail = detail
        self.line = line

    def at_line(self, line: Optional[int]) -> "ScenarioError":
        """Return a copy of this error anchored at ``line`` (kept if already set)."""
        if self.line is not None or line is None:
            return self
        return ScenarioError(self.code, self.detail, line)
