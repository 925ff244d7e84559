"""Exception hierarchy shared by every module."""


class PruneSamplingError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(PruneSamplingError, ValueError):
    """An argument violates an operation's precondition."""


class NetworkError(ContractError):
    """A network is structurally invalid."""


class CycleError(NetworkError):
    pass


class NormalizationError(NetworkError):
    pass


class NetworkFormatError(NetworkError):
    """Malformed network document.

    ``line`` and ``column`` are 1-based when known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnsupportedConstructError(NetworkFormatError):
    pass


class StuckStateError(PruneSamplingError):
    """Every value of a variable has zero probability given its Markov blanket."""


class CapExceededError(PruneSamplingError):
    """A state space or subset enumeration grew beyond its configured cap."""


class ZeroEvidenceError(ContractError):
    pass


class IntractableError(PruneSamplingError):
    """Exact inference would need a factor larger than the configured limit."""


class SamplingError(PruneSamplingError):
    """A sampler exhausted its retry budget without producing a state."""
