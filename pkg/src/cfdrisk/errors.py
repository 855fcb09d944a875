"""Exception hierarchy shared by all modules."""


class CfdRiskError(Exception):
    """Base class for errors raised by cfdrisk."""


class DimensionError(CfdRiskError, ValueError):
    """Series lengths or time grids do not match."""


class InputError(CfdRiskError, ValueError):
    """An argument violates a documented precondition."""


class UndefinedStrikeError(CfdRiskError, ArithmeticError):
    """Expected generation is zero, so a strike price has no meaning."""


class UndefinedRatioError(CfdRiskError, ArithmeticError):
    """A ratio metric (cost recovery, consumer price, CV) has a zero denominator."""


class ConfigError(CfdRiskError):
    """Study configuration is malformed."""


class DataError(CfdRiskError):
    """Input data files are missing or malformed."""


class FormatError(DataError):
    """A CSV file does not follow its schema."""


class PrerequisiteError(DataError):
    """A pipeline stage ran before the stage it depends on."""

    def __init__(self, message, command=None):
        super().__init__(message)
        self.command = command
