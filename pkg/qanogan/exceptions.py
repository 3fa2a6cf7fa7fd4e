"""Exception hierarchy for qanogan."""
from typing import Iterable, List, Optional


class QAnoGANError(Exception):
    """Base class for all qanogan errors."""
    pass


class InvalidArgumentError(QAnoGANError, ValueError):
    """An argument violates an operation's precondition."""
    pass


class ContractViolationError(QAnoGANError, RuntimeError):
    """A caller broke a usage contract (stale cache, anomalous training rows)."""
    pass


class DataParseError(QAnoGANError, ValueError):
    """A dataset file could not be parsed."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")
        self.row = row
        self.column = column


class ConfigError(QAnoGANError, ValueError):
    """Configuration is invalid; `keys` lists every offending key."""

    def __init__(self, message: str, keys: Iterable[str] = ()):
        self.keys: List[str] = list(keys)
        if self.keys:
            message = f"{message}: {', '.join(self.keys)}"
        super().__init__(message)


class CheckpointError(QAnoGANError, IOError):
    """A checkpoint file is missing, truncated or of an unknown version."""
    pass
