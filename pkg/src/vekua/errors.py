"""Exception hierarchy.  Each class carries the CLI exit code it maps to."""


class VekuaError(Exception):
    exit_code = 1


class ConfigError(VekuaError, ValueError):
    exit_code = 2


class DomainError(ConfigError):
    """Inadmissible mode, truncation or parameter."""


class NonNegativityError(ConfigError):
    """``q`` changes sign or vanishes identically."""

    def __init__(self, message, t_star=None, value=None):
        super().__init__(message)
        self.t_star = t_star
        self.value = value


class HypothesisViolation(VekuaError):
    exit_code = 3


class DegenerateRho(HypothesisViolation):
    """``rho = 0``: the mode matrix is not diagonalizable (|alpha| = |delta|, a = 0)."""


class ResonantMode(VekuaError):
    exit_code = 4

    def __init__(self, message, mode=None, d1=None, d2=None):
        super().__init__(message)
        self.mode = mode
        self.d1 = d1
        self.d2 = d2


class SingularMonodromy(ResonantMode):
    """``I - Phi(2 pi)`` is numerically singular in the shooting oracle."""


class NumericalFailure(VekuaError):
    exit_code = 5


class QuadratureFailure(NumericalFailure):
    pass


class TruncationAsymmetry(VekuaError):
    """Truncated mode set is not closed under conjugation."""

    exit_code = 6
