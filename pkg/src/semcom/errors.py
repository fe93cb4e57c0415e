"""Exception hierarchy shared across the package."""


class SemcomError(Exception):
    """Base class for all library errors."""


class NegativeEntryError(SemcomError):
    """A weight vector or matrix contains a negative entry."""


class AllZeroError(SemcomError):
    """A weight vector, matrix, or required row/column has no positive mass."""


class SupportMismatchError(SemcomError):
    """Cross entropy requested where p > 0 but q = 0."""


class InvalidParamsError(SemcomError):
    """A constructor or generator argument violates its contract."""


class UnknownActionError(SemcomError):
    """Action id outside the world's action set."""


class ZeroEvidenceError(SemcomError):
    """A concept has zero probability under every prior-weighted action."""


class EmptySRError(SemcomError):
    """Concept extraction produced no concepts and no fallback was requested."""


class InvalidStepError(SemcomError):
    """Quantization step outside (0, 1]."""


class UnknownSymbolError(SemcomError):
    """A symbol has no codeword in the codebook."""


class TruncatedStreamError(SemcomError):
    """A bit stream ended in the middle of a codeword."""


class InvalidPrefixError(SemcomError):
    """A bit stream contains a prefix that cannot start any codeword."""


class ConceptAlreadySentError(SemcomError):
    """A dialogue tried to send a concept that was already sent."""


class WorldFormatError(SemcomError):
    """A world file failed schema validation; message names the field."""


class ConfigError(SemcomError):
    """An experiment configuration failed validation."""
