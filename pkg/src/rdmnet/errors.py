"""Typed error hierarchy for rdmnet.

Every error derives from ``RdmNetError`` and from the closest builtin so
callers that only know ``ValueError`` still catch them.
"""


class RdmNetError(Exception):
    """Base class for all rdmnet errors."""


class ConfigError(RdmNetError, ValueError):
    """Invalid run configuration or override."""


class ShapeError(RdmNetError, ValueError):
    """Tensor or layer shape inconsistency."""

    def __init__(self, message: str, layer_id: str | None = None):
        self.layer_id = layer_id
        if layer_id:
            message = f"[{layer_id}] {message}"
        super().__init__(message)


class DataError(RdmNetError, ValueError):
    """Problem with input data (files, RDMs, statistics on degenerate inputs)."""


class MissingInputError(DataError):
    """A referenced input file or directory does not exist."""


class FormatError(DataError):
    """Bytes or text that do not follow one of the rdmnet file formats."""


class RdmValidationError(DataError):
    """Matrix that violates the RDM invariants."""


class DegenerateRdmError(DataError):
    """RDM whose off-diagonal entries are all equal."""


class UndefinedCorrelationError(DataError):
    """Correlation requested on a vector with zero variance."""


class SingularSystemError(DataError):
    """Normal equations that cannot be solved even after damping."""


class NumericDivergenceError(RdmNetError, ArithmeticError):
    """Non-finite loss during training or the LR range test."""

    def __init__(self, message: str, epoch: int | None = None, batch: int | None = None):
        self.epoch = epoch
        self.batch = batch
        if epoch is not None:
            message = f"{message} (epoch={epoch}, batch={batch})"
        super().__init__(message)
