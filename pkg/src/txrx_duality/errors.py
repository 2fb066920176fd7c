"""Exception hierarchy shared by all modules."""


class TxRxError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(TxRxError, ValueError):
    pass


class NotPositiveDefinite(TxRxError, ValueError):
    pass


class NotHermitian(TxRxError, ValueError):
    pass


class Singular(TxRxError, ArithmeticError):
    pass


class DegenerateDenominator(TxRxError, ArithmeticError):
    pass


class DegenerateGain(TxRxError, ArithmeticError):
    """A direct link gain is zero, so the constraint row cannot be formed."""

    def __init__(self, k, j):
        super().__init__(f"direct gain of user {k}, substream {j} is zero")
        self.k = k
        self.j = j


class ConfigError(TxRxError, ValueError):
    """Raised when a configuration fails validation."""

    def __init__(self, violations):
        super().__init__("invalid configuration: " + "; ".join(violations))
        self.violations = list(violations)


class NotConverged(TxRxError, RuntimeError):
    pass


class Infeasible(TxRxError, ArithmeticError):
    """The power solve for fixed beamformers returned a negative entry."""

    def __init__(self, message, powers=None):
        super().__init__(message)
        self.powers = powers
