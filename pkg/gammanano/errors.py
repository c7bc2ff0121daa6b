"""Exception hierarchy for gammanano."""

from typing import Optional

from .config import EXIT_CONFIG, EXIT_DECODE, EXIT_FAILURE


class GammaNanoError(Exception):
    """Base class for every error raised by gammanano."""

    exit_code = EXIT_FAILURE


class ConfigurationError(GammaNanoError):
    """Invalid, unreadable or inconsistent configuration."""

    exit_code = EXIT_CONFIG


class PhysicsDomainError(GammaNanoError, ValueError):
    """Argument outside the domain of an analytic formula."""

    exit_code = EXIT_CONFIG


class QuadratureError(GammaNanoError):
    """Numerical integration failed to reach the requested tolerance.

    Attributes:
        residual: Achieved error estimate (or neglected tail) of the failing integral.
    """

    def __init__(self, msg: str, residual: float = float("nan")):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


class CodecError(GammaNanoError, ValueError):
    exit_code = EXIT_DECODE


class FramingError(CodecError):
    pass


class DecodeError(GammaNanoError):
    """Message recovery failed.

    Attributes:
        stage: Pipeline stage that failed ('detect', 'frame', 'bits' or 'text').
    """

    exit_code = EXIT_DECODE

    def __init__(self, msg: str, stage: str = "decode", cause: Optional[Exception] = None):
        super().__init__(f"[{stage}] {msg}")
        self.stage = stage
        self.cause = cause


class InsufficientStatisticsError(DecodeError):
    def __init__(self, msg: str = "insufficient statistics"):
        super().__init__(msg, stage="detect")
