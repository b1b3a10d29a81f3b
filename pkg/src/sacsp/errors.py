"""Exception hierarchy. Every error raised by the package derives from ``SacspError``."""


class SacspError(Exception):
    pass


class DimensionError(SacspError, ValueError):
    pass


class NumericError(SacspError, ArithmeticError):
    pass


class DefinitenessError(SacspError, ValueError):
    pass


class DesignError(SacspError, ValueError):
    pass


class LengthError(SacspError, ValueError):
    pass


class ResampleError(SacspError, ValueError):
    pass


class CommonReferenceError(SacspError, ValueError):
    """Common-average reference needs at least two channels."""


class EpochingError(SacspError, ValueError):
    pass


class BalanceError(SacspError, ValueError):
    pass


class StatsError(SacspError, ValueError):
    pass


class DegenerateFilterError(SacspError, ValueError):
    pass


class InitError(SacspError, ValueError):
    pass


class OptimizationError(SacspError, RuntimeError):
    pass


class PatternError(SacspError, ValueError):
    pass


class FeatureError(SacspError, ValueError):
    pass


class EstimationError(SacspError, ValueError):
    pass


class TrainingError(SacspError, RuntimeError):
    pass


class CompatibilityError(SacspError, ValueError):
    pass


class GenerationError(SacspError, ValueError):
    pass


class SplitError(SacspError, ValueError):
    pass


class TestError(SacspError, ValueError):
    """Too few non-zero paired differences for the signed-rank test."""

    __test__ = False


class ConfigError(SacspError, ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class FormatError(SacspError, ValueError):
    pass
