"""Exception types shared across the codec."""


class CodecError(Exception):
    """Base class for all library errors."""


class InvalidInputError(CodecError, ValueError):
    """Malformed or non-finite input data."""


class BehindCameraError(CodecError, ValueError):
    """A point required to be in front of the camera is at or behind the near plane."""


class StreamFormatError(CodecError, ValueError):
    """Corrupt, truncated, or otherwise undecodable bitstream."""


class TrainingDivergedError(CodecError, RuntimeError):
    """Optimization produced a non-finite loss."""
