"""Exception hierarchy shared across the package."""


class ForgesetError(Exception):
    """Base class for all errors raised by this package."""


class BracketError(ForgesetError):
    """Root finder was given an interval with no sign change."""


class NoConvergence(ForgesetError):
    """Iterative routine exhausted its iteration budget."""


class BadSpec(ForgesetError):
    """Invalid layer list, generator parameters, or similar construction input."""


class ShapeError(ForgesetError):
    """Array dimensions do not chain or do not match."""


class LabelOutOfRange(ForgesetError):
    """A label falls outside [0, class_count)."""


class ParseError(ForgesetError):
    """CSV cell could not be parsed; message names row and column."""


class EmptyFile(ForgesetError):
    """CSV file holds no data rows."""


class BudgetError(ForgesetError):
    """Requested forget-set size exceeds the number of candidates."""


class EmptyRetainSet(ForgesetError):
    """A forget mask covers every training point."""


class SingleClassError(ForgesetError):
    """Relabeling needs at least two classes."""


class DivergenceError(ForgesetError):
    """Training loss became non-finite or exceeded the divergence guard."""


class EmptyBatch(ForgesetError):
    """A metric was asked to score zero samples."""


class TooLarge(ForgesetError):
    """Brute-force enumeration guard tripped; pass force=True to override."""


class ConfigError(ForgesetError):
    """Experiment configuration is malformed or inconsistent."""


class FileError(ForgesetError):
    """An input or output path is missing or unwritable."""
