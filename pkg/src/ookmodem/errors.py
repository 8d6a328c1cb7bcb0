"""Exception types raised across the package."""


class OokError(Exception):
    """Base class for all package errors."""


class IQFormatError(OokError, ValueError):
    """Malformed raw I/Q file (truncated sample, non-finite value)."""


class NoSignalError(OokError):
    """The envelope carries no usable on/off contrast."""

    def __init__(self, message="no signal detected"):
        super().__init__(message)


class DecodeError(OokError):
    """Signal present but no frame could be assembled."""


class CodebookError(OokError, ValueError):
    """Codebook file or contents violate the codebook rules."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
