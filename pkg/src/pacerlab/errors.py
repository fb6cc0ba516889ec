"""Exception hierarchy shared across the package."""


class PacerlabError(Exception):
    """Base class for all package errors."""


class DomainError(PacerlabError):
    """An argument is outside the mathematical domain of an operation."""


class InsufficientDataError(PacerlabError):
    """Not enough samples/observations to compute the requested quantity."""


class ValidationError(PacerlabError):
    """A structured input (questionnaire response, config) failed validation."""


class GenerationError(PacerlabError):
    """A stimulus plan could not be generated under the given constraints."""


class CalibrationAbandonedError(PacerlabError):
    """An interactive calibration ended without the user accepting a value."""


class ProtocolViolationError(PacerlabError):
    """An event was submitted that is not legal in the session's current stage."""
