"""Exception hierarchy shared by the qab modules."""


class QabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(QabError, ValueError):
    """Invalid converter parameter set.

    ``violations`` lists every problem found, not only the first one.
    """

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations else [message]


class NonPositiveInductance(ConfigError):
    pass


class NegativeResistance(ConfigError):
    pass


class NegativeVoltage(ConfigError):
    pass


class PhaseShiftOutOfRange(ConfigError):
    pass


class NonPositiveFrequency(ConfigError):
    pass


class NonPositiveTurnsRatio(ConfigError):
    pass


class UnknownConfigKey(ConfigError):
    pass


class SingularInductanceMatrix(QabError):
    pass


class NoUniqueSteadyState(QabError):
    """The cycle map has a unit eigenvalue (lossless network)."""


class WrongWindowLength(QabError, ValueError):
    pass


class PowerFlowError(QabError):
    pass


class NonConvergence(PowerFlowError):
    pass


class JacobianSingular(PowerFlowError):
    pass
