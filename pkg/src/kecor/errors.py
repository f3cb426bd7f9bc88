"""Exception hierarchy shared by the whole package.

Every error carries a stable ``code`` string (used by the CLI and by
foreign-language callers to dispatch on error kind) and an ``exit_code``
for the command-line tool: 2 for configuration problems, 3 for data and
numerical problems.
"""


class KecorError(Exception):
    code = "KecorError"
    exit_code = 3


class DimensionMismatch(KecorError):
    code = "DimensionMismatch"


class NotPositiveDefinite(KecorError):
    """A factorization pivot or Schur complement was not strictly positive."""

    code = "NotPositiveDefinite"


class SnapshotMismatch(KecorError):
    """Layer traces from different parameter versions were combined."""

    code = "SnapshotMismatch"


class NonFiniteLoss(KecorError):
    """Training loss left the finite range (learning rate too large)."""

    code = "NonFiniteLoss"


class InsufficientPool(KecorError):
    code = "InsufficientPool"


class ConfigInvalid(KecorError):
    code = "ConfigInvalid"
    exit_code = 2


class TensorFileError(KecorError):
    code = "TensorFileError"


class BadMagic(TensorFileError):
    code = "BadMagic"


class BadCrc(TensorFileError):
    code = "BadCrc"


class UnsupportedVersion(TensorFileError):
    code = "UnsupportedVersion"


class UnsupportedDtype(TensorFileError):
    code = "UnsupportedDtype"
