"""Exception types carrying machine-readable error codes."""


class IotAoiError(Exception):
    """Base class. ``code`` is a stable identifier such as ``"NO_CONVERGENCE"``."""

    code = "ERROR"

    def __init__(self, message, code=None, **info):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.info = info

    def __str__(self):
        return f"[{self.code}] {super().__str__()}"


class ParameterError(IotAoiError, ValueError):
    """Raised when a parameter set violates one or more invariants.

    ``issues`` holds every violation, not only the first.
    """

    code = "INVALID_PARAMS"

    def __init__(self, issues):
        self.issues = list(issues)
        msg = "; ".join(f"{i.code}: {i.message}" for i in self.issues)
        code = self.issues[0].code if len(self.issues) == 1 else "INVALID_PARAMS"
        super().__init__(msg, code=code)


class NumericalError(IotAoiError, ArithmeticError):
    code = "NUMERICAL_FAILURE"


class SimulationError(IotAoiError, RuntimeError):
    code = "SIMULATION_FAILURE"
