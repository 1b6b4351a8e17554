"""DCT-basis adaptive modelling of nonlinear channels."""

from .errors import (
    ConfigError,
    ContractError,
    DctNeuronError,
    DomainError,
    NotInvertible,
    NumericError,
    SingularPencil,
    Unstable,
)

__version__ = "0.1.0"
