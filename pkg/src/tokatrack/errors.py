"""Exception types shared across the package.

Invalid arguments raise the builtin ``ValueError``; the classes below cover
failures that can only be detected while computing.
"""


class NumericalError(RuntimeError):
    """A numerical routine failed (singular pivot, non-converged iteration)."""


class CalibrationError(RuntimeError):
    """A penalty-calibration sweep produced no usable data."""


class SimulationError(RuntimeError):
    """A simulation aborted mid-run.

    Carries whatever history was accumulated before the failure in
    ``partial_result`` (may be ``None``).
    """

    def __init__(self, message, partial_result=None):
        super().__init__(message)
        self.partial_result = partial_result
