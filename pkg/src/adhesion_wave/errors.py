"""Exception types raised across the package."""


class AdhesionWaveError(Exception):
    """Base class for all package errors."""


class ParameterError(AdhesionWaveError, ValueError):
    """A parameter lies outside its admissible domain."""


class PreconditionError(AdhesionWaveError, ValueError):
    """An operation was called on inputs violating its precondition."""


class ConfigError(AdhesionWaveError, ValueError):
    """A configuration document failed validation."""


class NumericalBlowupError(AdhesionWaveError, FloatingPointError):
    """The time stepper produced non-finite values."""

    def __init__(self, step_index, t):
        self.step_index = step_index
        self.t = t
        super().__init__(
            f"non-finite state after step {step_index} (t={t:.6g}); "
            "check dt against cfl_limit"
        )


class StiffnessError(AdhesionWaveError, RuntimeError):
    """The adaptive integrator could not keep its step above the floor."""


class ConsistencyError(AdhesionWaveError, RuntimeError):
    """An internal structural check failed (signals a bug, not bad input)."""


class ArtifactError(AdhesionWaveError, OSError):
    """Writing an output file failed; the message carries the path."""
