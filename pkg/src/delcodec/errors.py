"""Exception types shared across the package."""


class DelcodecError(Exception):
    """Base class for all errors raised by delcodec."""


class DimensionError(DelcodecError):
    """Grid dimensions violate a precondition (odd, too small, mismatched)."""


class EdgeModeError(DelcodecError):
    """An operation was given an edge mode it does not support."""


class LostFrequencyError(DelcodecError):
    """A spectral division hit a zero multiplier with nonzero content and no
    replacement value was supplied."""


class FormatError(DelcodecError):
    """A byte stream could not be parsed (bad magic, truncation, bad field)."""


class EncodingError(DelcodecError):
    """The encoder could not produce a container that is guaranteed to
    roundtrip losslessly."""


class UnsafeContainerError(DelcodecError):
    """A container decoded to values too far from integers to trust the
    rounding step."""
