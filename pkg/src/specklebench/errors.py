"""Error types shared across the package.

Every error carries a short machine-readable ``code`` so the CLI can emit
single-line diagnostics of the form ``error: <code>: <detail>``.
"""


class SpeckleBenchError(Exception):
    """Base class for errors raised by this package."""

    code = "runtime"


class FileMissingError(SpeckleBenchError):
    code = "missing-file"


class UnsupportedImageError(SpeckleBenchError):
    """Image exists but has a bit depth or color type we do not accept."""

    code = "unsupported-image"


class CorruptImageError(SpeckleBenchError):
    code = "corrupt-image"


class ManifestError(SpeckleBenchError):
    code = "manifest"


class DatasetError(SpeckleBenchError):
    code = "dataset"


class UnknownAlgorithmError(SpeckleBenchError):
    code = "unknown-algorithm"


class ModelFormatError(SpeckleBenchError):
    code = "model-format"


class TrainingDivergedError(SpeckleBenchError):
    code = "training-diverged"
