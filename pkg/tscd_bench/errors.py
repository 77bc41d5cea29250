from typing import List


class BenchmarkError(Exception):
    """
    Base class for every error raised by the benchmark.
    """
    pass


class InvalidInputError(BenchmarkError, ValueError):
    """
    Raised when an input violates a documented precondition.
    """
    pass


class DegenerateColumnError(InvalidInputError):
    """
    Raised when a column has zero variance (or zero range) where a transform needs spread.
    """

    def __init__(self, column: int, reason: str = "zero variance"):
        self.column = column
        super().__init__(f"Column {column} is degenerate: {reason}")


class SparsityError(InvalidInputError):
    pass


class InsufficientLengthError(InvalidInputError):
    pass


class ScenarioError(InvalidInputError):
    pass


class NotPositiveDefiniteError(BenchmarkError, ValueError):
    pass


class RankDeficientError(BenchmarkError, ValueError):
    """
    Raised when a design matrix does not have full column rank.

    Attributes:
    - **column** (int): Index of the first design column found to be linearly dependent.
    """

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"Design matrix is rank deficient at column {column}")


class DeterministicRelationError(BenchmarkError, ValueError):
    pass


class NumericalError(BenchmarkError, RuntimeError):
    pass


class DivergenceError(NumericalError):
    pass


class LassoConvergenceError(BenchmarkError, RuntimeError):
    """
    Raised when coordinate descent exhausts its sweep budget.

    Attributes:
    - **sweeps** (int): Number of completed sweeps.
    - **max_change** (float): Largest coefficient change in the last sweep.
    """

    def __init__(self, sweeps: int, max_change: float):
        self.sweeps = sweeps
        self.max_change = max_change
        super().__init__(
            f"Coordinate descent did not converge after {sweeps} sweeps "
            f"(last max coefficient change {max_change:.3e})")


class UndefinedMetricError(BenchmarkError, ValueError):
    pass


class CoverageError(BenchmarkError, ValueError):
    pass


class ConfigError(BenchmarkError, ValueError):
    """
    Raised when an experiment configuration fails validation.

    Attributes:
    - **messages** (List[str]): One "location: message" entry per invalid field.
    """

    def __init__(self, messages: List[str]):
        self.messages = messages
        super().__init__("Invalid configuration: " + " | ".join(messages))
