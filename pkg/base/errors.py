"""
Error Taxonomy
Exception classes shared by the engine and the command line

Every error carries a machine-readable code and the process exit code the
CLI uses for its family:
- ConfigError    -> exit 1
- DataError      -> exit 2
- NumericalError -> exit 3
"""

from typing import List, Optional


class FundTailsError(Exception):
    """Base class for all errors raised by this package"""

    code = "ERROR"
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def describe(self) -> str:
        """
        Format the error for the command line

        Returns:
            str: '<CODE>: <message>'
        """
        return f"{self.code}: {self.message}"


# ==================== Configuration ====================

class ConfigError(FundTailsError):
    """Invalid run configuration or unreadable defaults"""

    code = "CONFIG"
    exit_code = 1


# ==================== Data ====================

class DataError(FundTailsError):
    """Input data is missing, malformed or unusable"""

    code = "DATA"
    exit_code = 2


class SchemaMismatchError(DataError):
    """Delimited file lacks required columns"""

    code = "DATA_SCHEMA"

    def __init__(self, path: str, missing_columns: List[str]):
        self.missing_columns = list(missing_columns)
        super().__init__(
            f"{path}: missing required column(s): {', '.join(self.missing_columns)}"
        )


class MalformedRowError(DataError):
    """A row could not be parsed"""

    code = "DATA_ROW"

    def __init__(self, path: str, line_number: int, reason: str):
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {reason}")


class MissingCpiMonthError(DataError):
    """A record month has no CPI index value"""

    code = "DATA_CPI"

    def __init__(self, month: str):
        self.month = month
        super().__init__(f"CPI table has no value for month {month}")


class DuplicateRecordError(DataError):
    """Two records share a fund identifier and month"""

    code = "DATA_DUPLICATE"


class EmptySnapshotError(DataError):
    """No records exist at the requested date"""

    code = "DATA_EMPTY_SNAPSHOT"


class EmptySampleError(DataError):
    """An operation needs at least one size value"""

    code = "DATA_EMPTY_SAMPLE"


# ==================== Numerical ====================

class NumericalError(FundTailsError):
    """A fit or statistic cannot be computed"""

    code = "NUMERICAL"
    exit_code = 3


class DomainError(NumericalError, ValueError):
    """Argument outside the support of a distribution"""

    code = "NUM_DOMAIN"


class InsufficientTailError(NumericalError, ValueError):
    """Too few points at or above the cutoff"""

    code = "NUM_TAIL_SIZE"

    def __init__(self, message: str, n_tail: Optional[int] = None):
        self.n_tail = n_tail
        super().__init__(message)


class DegenerateTailError(NumericalError, ValueError):
    """All tail points are equal, so the likelihood has no finite maximum"""

    code = "NUM_DEGENERATE"


class CutoffMismatchError(NumericalError, ValueError):
    """Two fits compared over different cutoffs"""

    code = "NUM_CUTOFF_MISMATCH"


class ReplicateFailureError(NumericalError):
    """Every bootstrap replicate failed to refit"""

    code = "NUM_REPLICATES"
