"""Reference (similarity) metrics between a candidate image and an aligned
reference: SSIM family, PSNR, error metrics, mutual information, Pearson
correlation, and Dice overlap on label masks.

Range-dependent metrics take the data-range parameter L either as an explicit
positive number or as a :class:`DataRangeMode`; the default is the joint
extrema of both images (pair mode), which keeps the scores symmetric in their
arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np
from scipy import ndimage

from .errors import DegenerateInputError, MetricsError
from .filters import downsample2, gaussian_kernel1d, uniform_filter2d
from .grid import DataRangeMode, ImageGrid, LabelMask, require_same_shape, resolve_data_range
from .normalize import minmax
from .pyramid import steerable_bands

__all__ = [
    "SsimParams",
    "MS_SSIM_WEIGHTS",
    "MetricReport",
    "ssim",
    "ms_ssim",
    "cw_ssim",
    "psnr",
    "error_metrics",
    "mi",
    "nmi",
    "pcc",
    "dsc",
]

DataRange = Union[None, float, int, DataRangeMode]

# published multi-scale exponents for five scales (sum 1.0001 as published)
MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)

MS_SSIM_MIN_SIDE = 11 * 2**4


@dataclass(frozen=True)
class SsimParams:
    """Window and stabilizer constants of the SSIM family."""

    kernel_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03


def _resolve_range(
    data_range: DataRange, image: ImageGrid, reference: Optional[ImageGrid] = None
) -> float:
    if data_range is None:
        data_range = DataRangeMode.pair() if reference is not None else DataRangeMode.per_image()
    if isinstance(data_range, DataRangeMode):
        if data_range.kind == "fixed":
            return float(data_range.value)
        if data_range.kind == "per-image":
            return resolve_data_range(data_range, [image])
        if reference is None:
            raise MetricsError(f"{data_range.kind} data-range mode needs a reference image")
        return resolve_data_range(data_range, [image, reference])
    value = float(data_range)
    if not math.isfinite(value) or value <= 0.0:
        raise DegenerateInputError(f"data range must be positive and finite, got {value}")
    return value


def _local_stats(x: np.ndarray, y: np.ndarray, params: SsimParams):
    k = gaussian_kernel1d(params.kernel_size, params.sigma)

    def smooth(a):
        out = ndimage.correlate1d(a, k, axis=0, mode="reflect")
        return ndimage.correlate1d(out, k, axis=1, mode="reflect")

    mu_x = smooth(x)
    mu_y = smooth(y)
    sxx = smooth(x * x) - mu_x * mu_x
    syy = smooth(y * y) - mu_y * mu_y
    sxy = smooth(x * y) - mu_x * mu_y
    return mu_x, mu_y, sxx, syy, sxy


def _ssim_maps(x, y, data_range, params):
    c1 = (params.k1 * data_range) ** 2
    c2 = (params.k2 * data_range) ** 2
    mu_x, mu_y, sxx, syy, sxy = _local_stats(x, y, params)
    lum = (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1)
    cs = (2.0 * sxy + c2) / (sxx + syy + c2)
    return lum, cs


def ssim(
    image: ImageGrid,
    reference: ImageGrid,
    data_range: DataRange = None,
    params: SsimParams = SsimParams(),
) -> float:
    """Structural similarity with an 11-tap Gaussian window (sigma 1.5).

    Local luminance times contrast-structure (C3 = C2/2 folded in), averaged
    over all pixel positions; the window uses symmetric boundary handling.
    """
    require_same_shape(image, reference)
    L = _resolve_range(data_range, image, reference)
    lum, cs = _ssim_maps(image.data, reference.data, L, params)
    return float(np.mean(lum * cs))


def ms_ssim(
    image: ImageGrid,
    reference: ImageGrid,
    data_range: DataRange = None,
    params: SsimParams = SsimParams(),
    weights=MS_SSIM_WEIGHTS,
) -> float:
    """Multi-scale SSIM over five scales.

    Contrast-structure contributes at every scale, luminance only at the
    coarsest; each scale transition is a Gaussian low-pass followed by 2x2
    mean pooling. Requires min(width, height) >= 176 so five scales exist.
    Negative per-scale means are clamped to zero, keeping the score in [0, 1].
    """
    require_same_shape(image, reference)
    if min(image.shape) < MS_SSIM_MIN_SIDE:
        raise MetricsError(
            f"ms_ssim needs min(width, height) >= {MS_SSIM_MIN_SIDE}, got {min(image.shape)}"
        )
    L = _resolve_range(data_range, image, reference)
    x = image.data
    y = reference.data
    score = 1.0
    for scale, weight in enumerate(weights):
        lum, cs = _ssim_maps(x, y, L, params)
        cs_mean = max(float(np.mean(cs)), 0.0)
        score *= cs_mean**weight
        if scale == len(weights) - 1:
            lum_mean = max(float(np.mean(lum)), 0.0)
            score *= lum_mean**weight
        else:
            x = downsample2(x, size=params.kernel_size, sigma=params.sigma)
            y = downsample2(y, size=params.kernel_size, sigma=params.sigma)
    return float(score)


def cw_ssim(
    image: ImageGrid,
    reference: ImageGrid,
    levels: int = 2,
    orientations: int = 16,
    K: float = 1e-12,
    window: int = 7,
) -> float:
    """Complex-wavelet SSIM on steerable-pyramid coefficients.

    Both images are Minmax-normalized to (0, 255) internally. The magnitude
    of the windowed conjugate product makes the score insensitive to small
    consistent phase shifts, i.e. small spatial translations.
    """
    require_same_shape(image, reference)
    a = minmax(image, j1=0.0, j2=255.0).data
    b = minmax(reference, j1=0.0, j2=255.0).data
    bands_a = steerable_bands(a, levels=levels, orientations=orientations)
    bands_b = steerable_bands(b, levels=levels, orientations=orientations)
    margin = window // 2
    scores = []
    for ca, cb in zip(bands_a, bands_b):
        corr = ca * np.conj(cb)
        corr_w = uniform_filter2d(corr.real, window) + 1j * uniform_filter2d(corr.imag, window)
        varr_w = uniform_filter2d(np.abs(ca) ** 2 + np.abs(cb) ** 2, window)
        sl = np.s_[margin:-margin, margin:-margin]
        band_map = (2.0 * np.abs(corr_w[sl]) + K) / (varr_w[sl] + K)
        scores.append(float(np.mean(band_map)))
    return float(np.mean(scores))


def psnr(image: ImageGrid, reference: ImageGrid, data_range: DataRange = None) -> float:
    """Peak signal-to-noise ratio in dB; identical images give +inf."""
    require_same_shape(image, reference)
    L = _resolve_range(data_range, image, reference)
    mse = float(np.mean((reference.data - image.data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(L * L / mse)


def error_metrics(image: ImageGrid, reference: ImageGrid) -> Dict[str, float]:
    """MAE, MSE, RMSE and NMSE from a single pass over the difference.

    NMSE divides the summed squared error by pixel count times the corrected
    sample standard deviation of the reference; a constant reference has no
    defined normalizer.
    """
    require_same_shape(image, reference)
    diff = reference.data - image.data
    mae = float(np.mean(np.abs(diff)))
    mse = float(np.mean(diff * diff))
    sigma_ref = float(np.std(reference.data, ddof=1)) if reference.data.size > 1 else 0.0
    if sigma_ref == 0.0:
        raise DegenerateInputError("NMSE is undefined for a constant reference image")
    return {
        "mae": mae,
        "mse": mse,
        "rmse": math.sqrt(mse),
        "nmse": mse / sigma_ref,
    }


def _bin_indices(data: np.ndarray, bins: int) -> np.ndarray:
    lo = float(data.min())
    hi = float(data.max())
    if hi == lo:
        return np.zeros(data.shape, dtype=np.int64)
    # the 1e-9 floor guard keeps exact-boundary values in a stable bin under
    # ulp-level perturbations, mirroring normalize.binning
    idx = np.minimum(float(bins - 1), np.floor(bins * (data - lo) / (hi - lo) + 1e-9))
    return idx.astype(np.int64)


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p)))


def _histograms(image: ImageGrid, reference: ImageGrid, bins: int):
    require_same_shape(image, reference)
    bi = _bin_indices(image.data, bins).ravel()
    br = _bin_indices(reference.data, bins).ravel()
    joint = np.bincount(bi * bins + br, minlength=bins * bins).astype(np.float64)
    joint /= bi.size
    joint = joint.reshape(bins, bins)
    return joint.sum(axis=1), joint.sum(axis=0), joint


def mi(image: ImageGrid, reference: ImageGrid, bins: int = 256) -> float:
    """Mutual information in nats, on independently binned intensities."""
    pi, pr, joint = _histograms(image, reference, bins)
    return _entropy(pi) + _entropy(pr) - _entropy(joint.ravel())


def nmi(image: ImageGrid, reference: ImageGrid, bins: int = 256) -> float:
    """Normalized mutual information (H(I) + H(R)) / H(I, R), in [1, 2].

    Identical images give 2. Two constant images carry zero entropy each and
    are scored 2 as well (identical after binning).
    """
    pi, pr, joint = _histograms(image, reference, bins)
    h_joint = _entropy(joint.ravel())
    if h_joint == 0.0:
        return 2.0
    return (_entropy(pi) + _entropy(pr)) / h_joint


def pcc(image: ImageGrid, reference: ImageGrid) -> float:
    """Pearson product-moment correlation over all pixels."""
    require_same_shape(image, reference)
    x = image.data.ravel()
    y = reference.data.ravel()
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(np.dot(xc, xc)) * float(np.dot(yc, yc)))
    if denom == 0.0:
        raise DegenerateInputError("correlation is undefined for a constant image")
    return float(np.dot(xc, yc) / denom)


def dsc(
    mask_a: LabelMask,
    mask_b: LabelMask,
    class_id: Optional[int] = None,
    epsilon: float = 1e-7,
) -> float:
    """Dice similarity coefficient of one class, or of the total foreground.

    Args:
        class_id: class to compare; None compares the union of all nonzero
            classes ("total foreground").
        epsilon: smoothing constant; keeps two empty masks at score 1.
    """
    require_same_shape(mask_a, mask_b)
    if epsilon <= 0.0:
        raise MetricsError("epsilon must be positive")
    if class_id is None:
        a = mask_a.labels > 0
        b = mask_b.labels > 0
    else:
        a = mask_a.labels == class_id
        b = mask_b.labels == class_id
    inter = float(np.count_nonzero(a & b))
    total = float(np.count_nonzero(a) + np.count_nonzero(b))
    return (2.0 * inter + epsilon) / (total + epsilon)


@dataclass(frozen=True)
class MetricReport:
    """One named score with its orientation and evaluation context."""

    metric: str
    score: float
    higher_is_better: bool
    data_range_mode: str
    normalization: str

    def to_csv_row(self) -> str:
        orientation = "higher" if self.higher_is_better else "lower"
        return ",".join(
            [self.metric, _format_score(self.score), orientation, self.data_range_mode, self.normalization]
        )


def _format_score(score: float) -> str:
    if math.isinf(score):
        return "inf" if score > 0 else "-inf"
    return repr(float(score))
