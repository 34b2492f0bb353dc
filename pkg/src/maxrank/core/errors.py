"""Errors - Exception hierarchy shared by every module"""


class MaxRankError(Exception):
    """Base class for all maxrank errors"""


class DimensionMismatch(MaxRankError, ValueError):
    """Operand shapes do not fit together"""


class FieldMismatch(MaxRankError, ValueError):
    """Complex data supplied under the real field tag"""


class PreconditionError(MaxRankError, ValueError):
    """A method precondition does not hold numerically"""


class EpsilonExhausted(MaxRankError):
    """No epsilon down to eps_floor produced a qualifying perturbation"""

    def __init__(self, message: str, last_epsilon: float = 0.0):
        super().__init__(message)
        self.last_epsilon = last_epsilon


class GenericityExhausted(MaxRankError):
    """A generic-position draw kept failing its post-hoc checks"""

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class NoSingularMember(MaxRankError):
    """The slice span has no nonzero singular member that could be found"""


class SpectrumError(MaxRankError):
    """Eigenvalue computation failed or its result is unusable"""


class CertificateFormatError(MaxRankError, ValueError):
    """A tensor or certificate document could not be parsed"""


class ConfigError(MaxRankError, ValueError):
    """config.yml could not be read or does not match its schema"""
