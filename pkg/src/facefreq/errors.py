"""Exception hierarchy.

Everything derives from FaceFreqError so callers can catch library errors
in one clause; most also derive from ValueError to stay friendly to code
that only knows the stdlib conventions.
"""


class FaceFreqError(Exception):
    """Base class for all facefreq errors."""


class MalformedImageError(FaceFreqError, ValueError):
    """Encoded image stream is truncated or otherwise undecodable."""


class UnsupportedFormatError(FaceFreqError, ValueError):
    """Encoded image is not PNG or baseline JPEG."""


class InvalidQualityError(FaceFreqError, ValueError):
    """JPEG quality outside [1, 100]."""


class ZeroDimensionError(FaceFreqError, ValueError):
    """Requested output width or height is < 1."""


class EmptyIntersectionError(FaceFreqError, ValueError):
    """Crop box does not overlap the image after clamping."""


class DegenerateLabelsError(FaceFreqError, ValueError):
    """Training set contains a single class."""


class DimensionMismatchError(FaceFreqError, ValueError):
    """Feature vector length does not match the model."""


class SingleClassError(FaceFreqError, ValueError):
    """Score set lacks one of the two classes required for a metric."""


class NoBonafideError(FaceFreqError, ValueError):
    """Score set has no bona fide records."""


class IdMismatchError(FaceFreqError, ValueError):
    """Score sets to fuse do not cover the same sample ids."""


class LabelConflictError(FaceFreqError, ValueError):
    """Same sample id carries different labels across score sets."""


class ScoreFileError(FaceFreqError, ValueError):
    """Score CSV failed to parse or validate."""


class PipelineError(FaceFreqError):
    """A pipeline stage failed; the message names the offending sample."""


class ManifestError(FaceFreqError, ValueError):
    """Manifest line failed to parse or validate."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicatePathError(ManifestError):
    """Same image path listed twice in a manifest."""


class UnknownLabelError(ManifestError):
    """Manifest label is neither 'bonafide' nor 'attack'."""
