"""Exception hierarchy.

Every error carries the CLI exit code of its category so the command layer
never has to map types by hand.
"""


class FluxnoiseError(Exception):
    exit_code = 1


class DataError(FluxnoiseError):
    """Malformed input file or record."""

    exit_code = 3


class NumericError(FluxnoiseError):
    exit_code = 4


class ConvergenceError(NumericError):
    """Spectrum not converged in the truncated oscillator basis."""

    def __init__(self, message, residual=None, index=None):
        super().__init__(message)
        self.residual = residual
        self.index = index


class FitError(NumericError):
    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class PreconditionError(FluxnoiseError, ValueError):
    exit_code = 5


class SingularityError(PreconditionError):
    """Flux dispersion too small for the dephasing inversion."""


class UnphysicalPointError(PreconditionError):
    """Measured rates imply a negative pure-dephasing or noise rate."""


class RegimeError(PreconditionError):
    """Input lies outside the physical regime a formula assumes."""


class GapRequiredError(PreconditionError):
    pass
