"""Exception hierarchy shared by the library and the command line."""


class DupFragError(Exception):
    """Base class for all package errors."""


class InputError(DupFragError, ValueError):
    """Malformed or unreadable input (FASTA, CSV, manifest, parameters)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(DupFragError, ArithmeticError):
    """A solver diverged or a numerical condition was violated."""
