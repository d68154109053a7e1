"""Exception hierarchy shared by every planeval module."""

from __future__ import annotations


class PlanEvalError(Exception):
    """Base class for all errors raised by planeval."""


class MismatchedDimensions(PlanEvalError, ValueError):
    pass


class EmptyWindow(PlanEvalError, ValueError):
    pass


class EmptySet(PlanEvalError, ValueError):
    pass


class BadK(PlanEvalError, ValueError):
    pass


class EpisodeFinished(PlanEvalError):
    pass


class AgentFailure(PlanEvalError):
    """The agent produced no usable answer for one step or task."""


class DegenerateTask(PlanEvalError):
    """Candidate sampling could not produce distinguishable candidates."""


class UnknownReference(PlanEvalError, KeyError):
    pass


class Unsatisfiable(PlanEvalError):
    pass


class TooLarge(PlanEvalError):
    pass


class GenerationExhausted(PlanEvalError):
    pass


class UnboundPlaceholder(PlanEvalError, KeyError):
    pass


class MixedRoles(PlanEvalError, ValueError):
    pass


class EmptyInput(PlanEvalError, ValueError):
    pass


class ConfigError(PlanEvalError, ValueError):
    pass


class SchemaVersionError(PlanEvalError, ValueError):
    pass


# chat endpoint failures; each is distinguishable by type


class EndpointError(PlanEvalError):
    pass


class AuthError(EndpointError):
    pass


class Timeout(EndpointError):
    pass


class RetriesExhausted(EndpointError):
    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


class MalformedResponse(EndpointError):
    pass
