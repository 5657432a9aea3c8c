"""Exception hierarchy.

Each family maps onto one CLI exit code (see ``barriernet.cli``).
"""


class BarrierNetError(Exception):
    exit_code = 1


class ConfigError(BarrierNetError, ValueError):
    """Malformed configuration, grid or schedule."""

    exit_code = 4


class HypothesisViolation(BarrierNetError):
    """A sign or ellipticity hypothesis of the existence theory fails."""

    exit_code = 2

    def __init__(self, condition, message=None):
        self.condition = condition
        super().__init__(message or condition)


class EllipticityError(HypothesisViolation):
    def __init__(self, message):
        super().__init__("ellipticity (a > 0)", message)


class PreconditionError(BarrierNetError, ValueError):
    """An operation was called outside its documented domain."""

    exit_code = 2


class ContractError(PreconditionError):
    pass


class DomainError(PreconditionError):
    pass


class BracketError(BarrierNetError):
    exit_code = 3


class SolverError(BarrierNetError):
    exit_code = 3

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class IterationIntegrityError(SolverError):
    """The monotone sequence left its bracket or stopped being monotone."""


class ResolutionWarning(UserWarning):
    """Mollifier scale is below what the grid can resolve."""
