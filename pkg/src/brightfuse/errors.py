"""Exception hierarchy shared by all modules.

Every error that can surface at the CLI carries an ``exit_code`` so the
entry point can map failures to stable process exit statuses:

    0  success
    2  usage error (bad flags, mismatched weight tags)
    3  I/O error (missing or unreadable files)
    4  format or schema error (bad bit depth, malformed CRF/weight files)
    5  numeric or degenerate input (singular systems, empty pixel sets)
"""


class BrightfuseError(Exception):
    exit_code = 1


class UsageError(BrightfuseError):
    exit_code = 2


class InputOutputError(BrightfuseError):
    exit_code = 3


class FormatError(BrightfuseError):
    exit_code = 4


class SchemaError(FormatError):
    pass


class MonotonicityError(SchemaError):
    pass


class WeightFileError(FormatError):
    """Bad residual-network weight file (magic, version, or shape chain)."""


class DegenerateInputError(BrightfuseError):
    exit_code = 5


class DimensionMismatchError(DegenerateInputError):
    pass


class InsufficientImagesError(DegenerateInputError):
    pass


class SingularSystemError(DegenerateInputError):
    pass


class EmptyCaseSetError(DegenerateInputError):
    """No usable under-exposed pixels when fitting the base-layer gain."""
