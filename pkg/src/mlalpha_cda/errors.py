"""Exception types; the CLI maps each to an exit code."""


class ConfigError(ValueError):
    """Invalid configuration or mismatched inputs (exit code 1)."""


class BlowUpError(RuntimeError):
    """A non-finite coefficient appeared during time stepping (exit code 2)."""

    def __init__(self, message: str, step: int | None = None, t: float | None = None):
        super().__init__(message)
        self.step = step
        self.t = t


class InvariantError(AssertionError):
    """An internal invariant (symmetry, divergence, ordering) was violated (exit code 3)."""
