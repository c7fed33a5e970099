"""Error hierarchy shared by every package in the repo."""


class GHLError(Exception):
    """Base class for all library errors."""


class DimensionError(GHLError, ValueError):
    """Operand shapes do not agree."""


class ShapeError(DimensionError):
    """A shape is impossible for the requested operation (e.g. kernel too large)."""


class ParameterError(GHLError, ValueError):
    """A scalar hyperparameter is out of its valid range."""


class NumericError(GHLError, ArithmeticError):
    """NaN or Inf where finite values are required."""


class StateError(GHLError, RuntimeError):
    """Cached forward state is missing or does not match the layer."""


class DataError(GHLError, ValueError):
    """Labels or dataset contents are invalid."""


class FormatError(GHLError, ValueError):
    """A binary file does not follow its declared layout."""


class DatasetIOError(GHLError, OSError):
    """A dataset file is unreadable or truncated."""


class DatasetMissingError(DatasetIOError, FileNotFoundError):
    """Dataset files are not present under the data directory."""
