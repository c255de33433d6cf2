"""Exception hierarchy shared by every module."""


class TargetDiffError(Exception):
    """Base class for all package errors."""


class GraphFormatError(TargetDiffError):
    """Malformed edge-list or target-set input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegeneratePartitionError(TargetDiffError):
    """A side of the partition has zero volume."""


class NumericalError(TargetDiffError):
    """A numerical routine could not produce a result."""


class ZeroImageError(NumericalError):
    """Power iteration kept mapping its start vector to zero."""


class SpectrumTooLargeError(NumericalError):
    """Dense eigendecomposition refused for a matrix above the size cap."""


class UndefinedEstimatorError(NumericalError):
    """Impact estimator hit a zero-degree node inside the target set."""


class ConfigError(TargetDiffError):
    """Bad experiment configuration; carries the file path and offending key."""

    def __init__(self, message: str, path: str | None = None, key: str | None = None):
        self.path = path
        self.key = key
        where = ":".join(p for p in (path, key) if p)
        super().__init__(f"{where}: {message}" if where else message)
