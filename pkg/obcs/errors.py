"""
Exception hierarchy for the one-bit compressed sensing package.
"""


class ObcsError(Exception):
    """Base class for every error raised by obcs."""


class DimensionError(ObcsError, ValueError):
    """Shapes or counts that do not fit together (s > n, len(y) != m, ...)."""


class DegenerateMeasurementError(ObcsError):
    """A^T y vanishes, so no first index can be selected."""


class PivotDegenerateError(ObcsError):
    """y^T A_j0 is too small to eliminate the normalization constraint."""


class SolverNumericError(ObcsError):
    """An iterate, objective or gradient became non-finite."""

    def __init__(self, message, iteration):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class StagnationError(ObcsError):
    """The matching proxy is identically zero on every allowed index."""


class OracleRefusedError(ObcsError):
    """Brute-force enumeration requested beyond its size guard."""


class ConfigError(ObcsError, ValueError):
    """Invalid experiment configuration or command-line arguments."""


class FileFormatError(ObcsError, ValueError):
    """Malformed matrix, sign or signal file."""
