"""Exception types shared across the package."""


class ChaosForgeError(Exception):
    """Base class for all package errors."""


class NonFiniteError(ChaosForgeError):
    """A numeric computation produced NaN/inf (or left its guard bounds)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateDimensionError(ChaosForgeError):
    """A state dimension has max == min on the normalization fit window."""


class ShapeMismatchError(ChaosForgeError):
    """Array shapes are inconsistent with the declared architecture."""


class DivergedError(ChaosForgeError):
    """Training loss became non-finite."""


class ZeroVarianceError(ChaosForgeError):
    """Targets have zero variance, so R^2 is undefined."""


class TooShortError(ChaosForgeError):
    """Bit sequence is shorter than the test's minimum length."""


class UnderdeterminedError(ChaosForgeError):
    """Not enough distinct measurements to fit the requested coefficients."""


class RankDeficientError(ChaosForgeError):
    """Measurement records do not span the regressor space."""


class MissingCoefficientsError(ChaosForgeError):
    """No coefficient entry for the requested parallelism level."""


class OutOfDomainError(ChaosForgeError):
    """Requested point lies outside the estimator's fitted domain."""


class UnsupportedArchError(ChaosForgeError):
    """The generator cannot emit code for this architecture."""


class OutputExistsError(ChaosForgeError):
    """Refusing to overwrite existing output without --force."""


class ConfigError(ChaosForgeError):
    """Invalid or incomplete project configuration."""
