"""Exception hierarchy shared by all mrimetrics modules."""


class MetricsError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(MetricsError):
    """Two rasters that must share a shape do not."""


class DegenerateInputError(MetricsError):
    """Input is numerically degenerate for the requested operation.

    Examples: constant image where a data range or correlation is needed,
    zero edge pixels for an edge-based blur score, singular covariance.
    """


class RasterFormatError(MetricsError):
    """A raster file could not be parsed or written in the requested format."""


class ConfigError(MetricsError):
    """A benchmark or CLI configuration is invalid."""
