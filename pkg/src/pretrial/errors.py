"""Exception types shared across the toolkit."""


class PretrialError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(PretrialError, ValueError):
    """Invalid input data.

    Carries the name of the violated invariant when one applies, so callers
    (CLI, HTTP service) can surface it without parsing the message.
    """

    def __init__(self, message: str, *, invariant: str | None = None):
        super().__init__(message)
        self.invariant = invariant


class ConfigError(PretrialError, ValueError):
    """Malformed or inconsistent configuration (weight tables, matrices, specs)."""


class DataError(ValidationError):
    """Row-level dataset failure, annotated with its location."""

    def __init__(
        self,
        message: str,
        *,
        row: int | None = None,
        column: str | None = None,
        invariant: str | None = None,
    ):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column!r}")
        prefix = ", ".join(location)
        super().__init__(f"{prefix}: {message}" if prefix else message, invariant=invariant)
        self.row = row
        self.column = column
