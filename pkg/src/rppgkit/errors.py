"""Exception types shared across the pipeline.

Each class carries the CLI exit code it maps to: argument and format
problems exit 2, data-content problems (degenerate signals, failed
alignment) exit 3, anything else exits 1.
"""


class PipelineError(Exception):
    exit_code = 1


class ArgumentError(PipelineError):
    """Invalid argument value, bounds violation, or dimension mismatch."""

    exit_code = 2


class FormatError(PipelineError):
    """Missing or malformed on-disk data (frames, metadata, CSV)."""

    exit_code = 2


class DataError(PipelineError):
    """Degenerate signal content or alignment failure."""

    exit_code = 3
