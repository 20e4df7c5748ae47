"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid user-supplied configuration (layer sizes, grids, presets, ...)."""


class TrainingDivergedError(RuntimeError):
    """Raised when the training loss becomes non-finite.

    Carries the last record with finite losses (``last_record``, may be None
    if the very first evaluation diverged) and the history logged so far.
    """

    def __init__(self, message, last_record=None, history=()):
        super().__init__(message)
        self.last_record = last_record
        self.history = list(history)


class ZeroWavefunctionError(RuntimeError):
    """Raised when a model's wavefunction has numerically zero norm."""
