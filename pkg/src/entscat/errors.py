"""Exception types shared across the package."""


class EntscatError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class InputDomainError(EntscatError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 1


class ConfigError(EntscatError, ValueError):
    """Invalid run configuration (unknown keys, bad values, unstable grids)."""

    exit_code = 1


class NumericalError(EntscatError, ArithmeticError):
    """A numerical procedure failed (singular matching, no open channels...)."""

    exit_code = 2


class MissingTMatrixError(EntscatError, KeyError):
    """Required T-matrix elements are absent from a set."""

    exit_code = 1

    def __init__(self, missing):
        self.missing = list(missing)
        shown = ", ".join(str(m) for m in self.missing[:8])
        more = "" if len(self.missing) <= 8 else f" (+{len(self.missing) - 8} more)"
        super().__init__(f"missing T-matrix elements (J, bra, ket): {shown}{more}")

    def __str__(self):
        return self.args[0]


class TMatrixFormatError(EntscatError, ValueError):
    """Malformed T-matrix file; carries the offending line number."""

    exit_code = 1

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvariantError(EntscatError):
    """A physics invariant check failed."""

    exit_code = 3
