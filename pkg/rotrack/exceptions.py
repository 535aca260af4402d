from os import PathLike


class RotrackError(Exception):
    """Base class for data errors raised while reading, generating or evaluating tracking data."""


class PGMError(RotrackError, ValueError):
    """Raised when a byte string is not a readable binary PGM image."""


class UnsupportedFormatError(PGMError):
    """Raised when the magic number is not P5."""


class MalformedHeaderError(PGMError):
    """Raised when width, height or maxval cannot be parsed."""


class UnsupportedMaxvalError(PGMError):
    """Raised when maxval is anything but 255."""


class TruncatedPayloadError(PGMError):
    """Raised when the payload holds fewer than width * height bytes."""


class SequenceError(RotrackError, ValueError):
    """Raised when a tracking sequence cannot be loaded or generated."""


class MissingGroundTruthError(SequenceError):
    """Raised when the ground truth file is absent or empty."""


class FrameCountMismatchError(SequenceError):
    """Raised when the number of frames differs from the number of ground truth entries."""


class GroundTruthParseError(SequenceError):
    """Raised when a ground truth line cannot be parsed.

    Attributes:
        path: The offending ground truth file.
        line_number: 1-based line number of the offending line.
    """

    def __init__(self, path: str | PathLike, line_number: int, reason: str) -> None:
        super().__init__(f"{path}:{line_number}: {reason}")
        self.path = path
        self.line_number = line_number


class SpriteOutOfBoundsError(SequenceError):
    """Raised when a synthetic sprite would leave the frame."""


class ConfigError(RotrackError, ValueError):
    """Raised when a configuration document has unknown keys or invalid values."""


class DegenerateBoxError(RotrackError, ValueError):
    """Raised when a box polygon has zero area."""
