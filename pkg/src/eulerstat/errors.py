"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 1,
numerical failures with 2, and I/O or file-format problems with 3.
"""


class EulerStatError(Exception):
    """Base class for all package errors."""


class ConfigError(EulerStatError, ValueError):
    """Invalid configuration value, unknown key, or inconsistent setup."""


class GridMismatchError(EulerStatError, ValueError):
    """Operands live on different grids."""


class NumericsError(EulerStatError, RuntimeError):
    """A numerical procedure failed (divergence, NaN, blow-up)."""


class PicardError(NumericsError):
    """Fixed-point iteration for the implicit step did not converge.

    Carries the iteration count and the last relative change so callers can
    diagnose whether the time step was too large.
    """

    def __init__(self, iterations: int, last_change: float, tol: float):
        self.iterations = iterations
        self.last_change = last_change
        self.tol = tol
        super().__init__(
            f"implicit-step fixed point did not converge: relative change "
            f"{last_change:.3e} > tol {tol:.3e} after {iterations} iterations "
            f"(time step likely too large)"
        )


class FieldFormatError(EulerStatError, ValueError):
    """A binary field file or run manifest is malformed."""
