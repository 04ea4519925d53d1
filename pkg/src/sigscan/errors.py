"""Exception types raised across the package."""


class SignatureError(Exception):
    """Base class for all sigscan errors."""


class DomainError(SignatureError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class ResourceError(SignatureError, MemoryError):
    """A computation would exceed a configured size limit."""


class TrainingError(SignatureError, RuntimeError):
    """Training diverged."""

    def __init__(self, message, epoch):
        super().__init__(message)
        self.epoch = epoch


class PathParseError(SignatureError, ValueError):
    """A path file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
