"""Error taxonomy mirrored onto process exit codes by the CLIs."""


class FormatError(Exception):
    """Malformed or missing input file; exit code 2."""


class DataError(Exception):
    """Well-formed input that fails a semantic precondition; exit code 3."""
