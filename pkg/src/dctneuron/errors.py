"""Exception hierarchy shared by every module."""


class DctNeuronError(Exception):
    """Base class for all package errors."""


class ContractError(DctNeuronError, ValueError):
    """A precondition on the arguments was violated."""


class DomainError(ContractError):
    """An input lies outside the function domain [0, N-1]."""


class NotInvertible(DctNeuronError):
    """A map that must be monotone is not."""


class NumericError(DctNeuronError, ArithmeticError):
    """Non-finite values entered or left a numeric routine."""


class SingularPencil(NumericError):
    """The right-hand matrix of a generalized eigenproblem is not positive definite."""


class Unstable(ContractError):
    """A recursive filter has a pole on or outside the unit circle."""


class ConfigError(DctNeuronError):
    """Invalid experiment configuration; ``line`` points into the config file when known."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
