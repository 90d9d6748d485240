"""Exception hierarchy shared by all varcf modules."""


class VarcfError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(VarcfError, ValueError):
    """Array shapes are incompatible with the requested operation."""


class StructureError(VarcfError, ValueError):
    """Parameter / gradient / optimizer structures do not line up."""


class IndexRangeError(VarcfError, IndexError):
    """An embedding id falls outside the table's row range."""


class ConfigError(VarcfError, ValueError):
    """Invalid model or experiment configuration."""


class DataError(VarcfError):
    """Problem with ratings data (loading, splitting, integrity)."""


class ParseError(DataError):
    """Malformed ratings file; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyDatasetError(DataError):
    """A ratings file or metric input contained no usable rows."""


class MetricError(VarcfError, ValueError):
    """Metric is undefined for the given input (empty or degenerate)."""


class NumericError(VarcfError, ArithmeticError):
    """A computation produced non-finite values."""


class CheckpointError(VarcfError):
    """Checkpoint file is missing, malformed, or from an unknown version."""
