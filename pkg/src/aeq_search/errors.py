from typing import Optional


class AeqError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(AeqError, ValueError):
    pass


class GraphError(AeqError, ValueError):
    """Invalid graph data or an unknown fixture name."""


class Graph6Error(GraphError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotAbstractAlmostEquidistantError(GraphError):
    pass


class PointSetError(AeqError, ValueError):
    """Malformed point sets, point files, or geometric preconditions that do not hold."""


class UnsupportedDimensionError(AeqError, ValueError):
    pass


class CertificateError(AeqError, ValueError):
    pass


class SearchBudgetExceeded(AeqError):
    """Raised when an enumeration runs out of wall-clock budget.

    Carries the partial result; every row of its count table from the
    truncated order onwards is flagged incomplete.
    """

    def __init__(self, result, message: str = "time budget exceeded"):
        self.result = result
        super().__init__(message)
