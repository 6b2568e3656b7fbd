"""Scattering of identical diatomic molecules from entangled internal states."""
from .errors import (ConfigError, EntscatError, InputDomainError, InvariantError,
                     MissingTMatrixError, NumericalError, TMatrixFormatError)

__version__ = "0.1.0"

__all__ = ["ConfigError", "EntscatError", "InputDomainError", "InvariantError",
           "MissingTMatrixError", "NumericalError", "TMatrixFormatError", "__version__"]
