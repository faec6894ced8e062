"""Similarity and quality metrics, intensity normalization, parameterized MR
distortion simulation, and a benchmark harness for 2D float-valued rasters."""

from .errors import (
    ConfigError,
    DegenerateInputError,
    DimensionMismatchError,
    MetricsError,
    RasterFormatError,
)
from .grid import DataRangeMode, ImageGrid, IntensityStats, LabelMask, compute_stats, resolve_data_range
from .normalize import (
    NormalizationSpec,
    PLModel,
    apply_normalization,
    binning,
    cminmax,
    minmax,
    pl_apply,
    pl_fit,
    quantile_norm,
    zscore,
)
from .nss import NiqeModel, brisque_features, niqe_fit, niqe_score
from .phantom import make_phantom
from .raster import load_raster, save_raster
from .refmetrics import (
    MetricReport,
    SsimParams,
    cw_ssim,
    dsc,
    error_metrics,
    mi,
    ms_ssim,
    nmi,
    pcc,
    psnr,
    ssim,
)
from .nrmetrics import (
    blur_effect,
    blur_ratio_mean_blur,
    blurred_edge_widths,
    cpbd,
    jnb,
    mlc,
    mslc,
    mtv,
    variance_of_laplacian,
)
from .distort import KINDS, DistortionSpec, apply as apply_distortion, interpolate_param, sweep

__version__ = "0.1.0"
