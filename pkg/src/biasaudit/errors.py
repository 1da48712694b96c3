"""Exception types raised by the audit pipeline.

All library errors derive from :class:`BiasAuditError` so callers can catch
the whole family at once. Input/schema problems additionally derive from
``ValueError``.
"""


class BiasAuditError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInputError(BiasAuditError, ValueError):
    """An operation received an empty collection where data is required."""


class NoRecordsError(BiasAuditError, ValueError):
    """A metric was asked to run on an empty record list."""


class SingleSubgroupError(BiasAuditError, ValueError):
    """Fewer than two subgroups are present; disparity gaps are undefined."""


class TooFewClassesError(BiasAuditError, ValueError):
    """Fewer than two defined per-class effect sizes remain after exclusions."""


class AllColumnsRemovedError(BiasAuditError):
    """The expected-count filter removed every column of a table."""


class OutOfRangeError(BiasAuditError, ValueError):
    """A value fell outside its documented domain."""


class MismatchedSpecsError(BiasAuditError, ValueError):
    """Two scenario specs do not share classes/subgroups/prediction space."""


class EmptyFileError(BiasAuditError, ValueError):
    """An input file contains no data rows."""


class MissingColumnError(BiasAuditError, ValueError):
    """A declared column/field is absent from the input."""

    def __init__(self, column: str, row: int):
        self.column = column
        self.row = row
        super().__init__(f"missing column {column!r} at row {row}")


class MalformedRowError(BiasAuditError, ValueError):
    """A data row could not be parsed into a prediction record."""

    def __init__(self, row: int, detail: str = ""):
        self.row = row
        msg = f"malformed row {row}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)
