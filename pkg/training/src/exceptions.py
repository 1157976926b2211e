"""
Error hierarchy for the denoiser

Every error raised on purpose by the package derives from DenoiserError.
Value-like failures also derive from ValueError so callers catching the
builtin keep working.
"""


class DenoiserError(Exception):
    """Base class for all denoiser errors"""


class ParameterError(DenoiserError, ValueError):
    """Invalid distribution or configuration parameters (e.g. non-SPD scatter)"""


class DimensionError(DenoiserError, ValueError):
    """Mismatched vector / matrix dimensions"""


class InsufficientDataError(DenoiserError, ValueError):
    """Not enough patches to fit or cluster"""


class EmptySampleError(DenoiserError, ValueError):
    """Estimator called with zero clean samples"""


class ImageSizeError(DenoiserError, ValueError):
    """Image too small for the patch geometry, or patch count mismatch"""


class ImageFormatError(DenoiserError, ValueError):
    """Unsupported or malformed image file"""


class UnsupportedDepthError(ImageFormatError):
    """Image bit depth other than 8"""


class ModelFileError(DenoiserError):
    """Model file cannot be read"""


class ModelVersionError(ModelFileError):
    """Bad magic or unsupported format version"""


class ModelTruncatedError(ModelFileError):
    """File ends before the declared content"""


class ModelChecksumError(ModelFileError):
    """Stored CRC-64 does not match the content"""


__all__ = [
    "DenoiserError",
    "ParameterError",
    "DimensionError",
    "InsufficientDataError",
    "EmptySampleError",
    "ImageSizeError",
    "ImageFormatError",
    "UnsupportedDepthError",
    "ModelFileError",
    "ModelVersionError",
    "ModelTruncatedError",
    "ModelChecksumError",
]
