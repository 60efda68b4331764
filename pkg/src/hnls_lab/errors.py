"""Exception types raised across the package."""


class LabError(Exception):
    """Base class for all errors raised by hnls_lab."""


class InvalidFieldError(LabError, ValueError):
    """Field samples or coefficients are malformed (non-finite, wrong size)."""


class GridMismatchError(LabError, ValueError):
    """Two objects that must share a grid or operator window do not."""


class ResolutionError(LabError, ValueError):
    """The requested object is not resolved by the grid."""


class AliasingError(ResolutionError):
    """A product would alias: the factor's band exceeds the allowed fraction of the window."""


class SingularSymbolError(LabError, ValueError):
    """A multiplier symbol is not finite at some grid frequency."""


class SingularDeterminantError(LabError, ArithmeticError):
    """det(I + A) is numerically zero."""


class NonConvergentError(LabError, ArithmeticError):
    """A series was asked to run outside its convergence region."""


class BlowUpError(LabError, ArithmeticError):
    """Time integration produced a field whose size exceeds the abort threshold.

    The trajectory computed up to the abort is kept on ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(LabError, ValueError):
    """An experiment configuration is invalid."""
