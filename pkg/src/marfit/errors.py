"""Exception types shared across the package."""


class MarError(Exception):
    """Base class for marfit errors."""


class DegenerateCoefficientsError(MarError, ValueError):
    """Coefficient pair cannot be normalized or generated (zero norm / zero spectral radius)."""


class StationarityError(MarError, ValueError):
    """Coefficient pair violates the stationarity condition rho(A)*rho(B) < 1."""


class IllPosedRegressionError(MarError, RuntimeError):
    """A least-squares subproblem is rank deficient or numerically singular.

    Carries an estimate of the Gram-matrix condition number in ``condition``
    (may be ``inf`` for exactly singular systems).
    """

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition


class TuningFailureError(MarError, RuntimeError):
    """Penalty selection failed (e.g. degenerate stability curve in KSC)."""


class ConfigError(MarError, ValueError):
    """Invalid experiment configuration or CLI flag combination."""


class DataFormatError(MarError, ValueError):
    """Malformed series, model, or table file."""
