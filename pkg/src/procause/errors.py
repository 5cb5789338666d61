"""Exception hierarchy with machine-readable error codes.

Every domain error carries a stable ``code`` string so the CLI and the HTTP
API can surface it without string-matching messages.
"""

from __future__ import annotations


class ProcauseError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


class ParseError(ProcauseError):
    """Malformed XES/CSV input, reported with trace/event position."""

    code = "parse-error"


class SchemaError(ProcauseError):
    """Unknown attribute, bad group values, or inconsistent typing."""

    code = "schema-error"


class PlanError(ProcauseError):
    """Invalid extraction plan (class membership, duplicate features)."""

    code = "plan-error"


class TableError(ProcauseError):
    """Missing-value policy failures, empty results, column problems."""

    code = "table-error"


class RecommendError(ProcauseError):
    """No undesirable situations, class feature among candidates, etc."""

    code = "recommend-error"


class CiTestError(ProcauseError):
    """Insufficient rows or degenerate columns for an independence test."""

    code = "ci-test-error"


class KnowledgeError(ProcauseError):
    """Conflicting or malformed background knowledge."""

    code = "knowledge-error"


class CompatibilityError(ProcauseError):
    """A structure cannot be checked or oriented against the PAG."""

    code = "compatibility-error"


class CycleError(ProcauseError):
    """An orientation would create a directed cycle; detail names the cycle."""

    code = "cycle-error"


class FitError(ProcauseError):
    """Singular design, too few rows, or mode/type mismatch while fitting."""

    code = "fit-error"


class InterventionError(ProcauseError):
    """Bad intervention target/value or exact-inference guard exceeded."""

    code = "intervention-error"


class StageOrderError(ProcauseError):
    """A pipeline stage was requested before its predecessor exists."""

    code = "stage-order"


class SessionLockedError(ProcauseError):
    """Another writer holds the session; the request is rejected, not queued."""

    code = "session-locked"


class SessionNotFoundError(ProcauseError):
    code = "session-not-found"
