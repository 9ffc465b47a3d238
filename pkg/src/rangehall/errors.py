"""Exception hierarchy shared across the package."""


class RangehallError(Exception):
    """Base class for all package errors."""


# --- definition parsing / validation ---------------------------------------


class DefinitionError(RangehallError):
    """Base class for definition-file problems."""


class DefinitionSyntaxError(DefinitionError):
    """Document is not well-formed in any accepted syntax.

    Carries the line/column of the first offending token when the
    underlying parser provides one.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{message} ({where})"
        super().__init__(message)


class SchemaError(DefinitionError):
    """A required field is missing, or an unknown field is present."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class DanglingReferenceError(DefinitionError):
    """An identifier does not resolve to a declared node/service/level."""

    def __init__(self, message: str, dangling_id: str = "", location: str = ""):
        self.dangling_id = dangling_id
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class InvalidDefinitionError(DefinitionError):
    """Operation requires a definition that validates without errors."""


# --- event log --------------------------------------------------------------


class EventLogError(RangehallError):
    """Base class for event-log problems."""


class RunClosedError(EventLogError):
    """Append attempted on a run that already ended."""


class UnknownRunError(EventLogError):
    """No run with the given id."""


class UnknownActorError(EventLogError):
    """Actor is not a participant of the run."""


class UnknownReferenceError(EventLogError):
    """Event payload references an id unknown to the run's definition."""


# --- scoring ----------------------------------------------------------------


class ScoringError(RangehallError):
    """Base class for scoring problems."""


class KindMismatchError(ScoringError):
    """CTF operation applied to a CDX definition or vice versa."""


class UnknownServiceError(ScoringError):
    """Probe references a service not in scored_services."""


class UnknownCategoryError(ScoringError):
    """Manual scoring event uses a category the definition does not declare."""


class UnsortedInputError(ScoringError):
    """Transactions not in timestamp-then-source_seq order."""


# --- simulation -------------------------------------------------------------


class SimulationError(RangehallError):
    """Base class for simulator problems."""


class TooManyParticipantsError(SimulationError):
    """More trainee profiles than the definition allows."""


class MissingTeamProfileError(SimulationError):
    """CDX simulation config does not cover every team."""


# --- analytics --------------------------------------------------------------


class AnalyticsError(RangehallError):
    """Base class for analytics problems."""


class RunStillOpenError(AnalyticsError):
    """Operation requires a closed run."""


class NoRunsError(AnalyticsError):
    """Operation requires at least one run."""


class DefinitionMismatchError(AnalyticsError):
    """Run does not reference the given definition."""


class EmptyReportError(AnalyticsError):
    """Comparison requires two non-empty quality reports."""


# --- gateway ----------------------------------------------------------------


class GatewayError(RangehallError):
    """Base class for gateway problems."""


class NotAParticipantError(GatewayError):
    """Viewer is not registered in the run."""


class RoleForbiddenError(GatewayError):
    """Viewer's registered role does not permit the requested view."""
