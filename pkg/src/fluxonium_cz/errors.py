"""Exception types shared across the package."""


class FluxoniumCzError(Exception):
    """Base class for all package errors."""


class ConvergenceError(FluxoniumCzError):
    """Basis size too small: doubling it still moves retained energies."""


class NumericalError(FluxoniumCzError):
    """Dense linear algebra or integration produced an unusable result."""


class LabelingError(FluxoniumCzError):
    """A dressed state could not be assigned a bare product label."""


class IntegrationError(FluxoniumCzError):
    """The ODE integrator failed to reach the requested time or tolerance."""


class PhaseUndefinedError(FluxoniumCzError):
    """A diagonal element of the projected operator is too small to carry a phase."""


class InfeasibleGateError(FluxoniumCzError):
    """No drive detuning synchronizes both gate transitions at the requested speed."""


class CalibrationError(FluxoniumCzError):
    """Readout calibration matrix is singular or otherwise unusable."""


class FitError(FluxoniumCzError):
    """A nonlinear fit diverged or returned an invalid estimate."""


class OptimizationError(FluxoniumCzError):
    """Optimizer aborted; carries the partial trace when available."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ConfigError(FluxoniumCzError):
    """Device configuration file failed validation."""
