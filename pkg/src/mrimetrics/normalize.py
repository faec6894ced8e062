"""Intensity normalization: Minmax, clipped Minmax, Zscore, Quantile, Binning
and two-piece linear histogram standardization (PL) with its training step.

Every method is a monotone non-decreasing map of intensity and handles its
degenerate case explicitly (constant input, zero IQR, coincident landmarks)
instead of dividing by zero.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateInputError, MetricsError
from .grid import ImageGrid, compute_stats

__all__ = [
    "minmax",
    "cminmax",
    "zscore",
    "quantile_norm",
    "binning",
    "PLModel",
    "pl_fit",
    "pl_apply",
    "NormalizationSpec",
    "apply_normalization",
    "NORMALIZATION_METHODS",
]

logger = logging.getLogger(__name__)

NORMALIZATION_METHODS = ("none", "minmax", "cminmax", "zscore", "quantile", "binning", "pl")


def minmax(
    image: ImageGrid,
    i1: Optional[float] = None,
    i2: Optional[float] = None,
    j1: float = 0.0,
    j2: float = 1.0,
) -> ImageGrid:
    """Affine map of [i1, i2] onto [j1, j2]; source range defaults to the
    image extrema. A constant source range yields the constant image j1."""
    if j1 >= j2:
        raise MetricsError("target range needs j1 < j2")
    data = image.data
    lo = float(data.min()) if i1 is None else float(i1)
    hi = float(data.max()) if i2 is None else float(i2)
    if hi < lo:
        raise MetricsError("source range needs i2 >= i1")
    if hi == lo:
        return ImageGrid(np.full_like(data, j1), spacing=image.spacing)
    out = (data - lo) / (hi - lo) * (j2 - j1) + j1
    return ImageGrid(out, spacing=image.spacing)


def cminmax(
    image: ImageGrid,
    p: float = 5.0,
    q: Optional[float] = None,
    j1: float = 0.0,
    j2: float = 1.0,
) -> ImageGrid:
    """Clip at the p-th and q-th percentiles, then Minmax to [j1, j2].

    q defaults to 100 - p. Nearly constant images (coincident percentiles)
    yield the constant image j1.
    """
    if q is None:
        q = 100.0 - p
    if not 0.0 <= p < q <= 100.0:
        raise MetricsError(f"clip percentiles need 0 <= p < q <= 100, got ({p}, {q})")
    stats = compute_stats(image)
    lo = stats.percentile(p)
    hi = stats.percentile(q)
    if hi == lo:
        return ImageGrid(np.full_like(image.data, j1), spacing=image.spacing)
    clipped = np.clip(image.data, lo, hi)
    out = (clipped - lo) / (hi - lo) * (j2 - j1) + j1
    return ImageGrid(out, spacing=image.spacing)


def zscore(image: ImageGrid) -> ImageGrid:
    """Shift to zero mean and scale to unit population standard deviation.

    Constant images map to all zeros. The population divisor (N) is used so
    that zscore(zscore(I)) == zscore(I) holds exactly in exact arithmetic.
    """
    data = image.data
    mu = float(np.mean(data))
    sigma = float(np.std(data))
    if sigma == 0.0:
        return ImageGrid(np.zeros_like(data), spacing=image.spacing)
    return ImageGrid((data - mu) / sigma, spacing=image.spacing)


def quantile_norm(image: ImageGrid) -> ImageGrid:
    """Shift to zero median and scale to unit inter-quartile range.

    With a zero IQR (large fraction of equal values) the division is omitted
    and the result is I - median.
    """
    stats = compute_stats(image)
    med = stats.percentile(50.0)
    iqr = stats.percentile(75.0) - stats.percentile(25.0)
    data = image.data - med
    if iqr == 0.0:
        return ImageGrid(data, spacing=image.spacing)
    return ImageGrid(data / iqr, spacing=image.spacing)


def binning(image: ImageGrid, bins: int = 256) -> ImageGrid:
    """Map intensities onto integer bin values 0..bins-1 (stored as floats).

    Constant images map to all zeros, consistent with the Minmax degenerate
    rule. The top intensity is clamped into the last bin. A 1e-9 guard on
    the floor keeps values sitting exactly on a bin boundary from flipping
    bins under ulp-level perturbations (e.g. after an affine renormalization).
    """
    if bins < 2:
        raise MetricsError(f"binning needs at least 2 bins, got {bins}")
    data = image.data
    lo = float(data.min())
    hi = float(data.max())
    if hi == lo:
        return ImageGrid(np.zeros_like(data), spacing=image.spacing)
    out = np.minimum(float(bins - 1), np.floor(bins * (data - lo) / (hi - lo) + 1e-9))
    return ImageGrid(out, spacing=image.spacing)


@dataclass(frozen=True)
class PLModel:
    """Standard-scale landmarks of the two-piece linear standardization.

    s1 and s2 are the trained standard-scale endpoints, m_s the standard
    mode landmark, with s1 < m_s < s2. p_low/p_high record which source
    percentiles anchor the endpoints.
    """

    s1: float
    m_s: float
    s2: float
    p_low: float
    p_high: float

    def __post_init__(self):
        if not self.s1 < self.m_s < self.s2:
            raise MetricsError("PL landmarks need s1 < m_s < s2")
        if not 0.0 <= self.p_low < self.p_high <= 100.0:
            raise MetricsError("PL percentiles need 0 <= p_low < p_high <= 100")

    def to_json(self) -> str:
        return json.dumps(
            {
                "s1": self.s1,
                "m_s": self.m_s,
                "s2": self.s2,
                "p_low": self.p_low,
                "p_high": self.p_high,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "PLModel":
        try:
            raw = json.loads(text)
            return cls(
                s1=float(raw["s1"]),
                m_s=float(raw["m_s"]),
                s2=float(raw["s2"]),
                p_low=float(raw["p_low"]),
                p_high=float(raw["p_high"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MetricsError(f"malformed PL model document: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="ascii")

    @classmethod
    def load(cls, path) -> "PLModel":
        return cls.from_json(Path(path).read_text(encoding="ascii"))


def _foreground_mode(image: ImageGrid, bins: int = 256) -> float:
    """Histogram mode of the foreground (pixels > 0); equal-width bins.

    Backgrounds are exactly zero in the intended skull-stripped inputs, so
    the mode is computed on positive pixels only; an all-background image
    falls back to the full intensity set.
    """
    values = image.data[image.data > 0.0]
    if values.size == 0:
        values = image.data.ravel()
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return lo
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    k = int(np.argmax(counts))
    return float(0.5 * (edges[k] + edges[k + 1]))


def pl_fit(images: Iterable[ImageGrid], p_low: float = 1.0, p_high: float = 99.0) -> PLModel:
    """Train PL landmarks from a set of images.

    The standard-scale endpoints are the means of the per-image p_low/p_high
    percentiles; the standard mode is the mean of the per-image foreground
    modes after each image's percentile span is mapped onto [s1, s2].

    Raises:
        MetricsError: with fewer than two training images.
        DegenerateInputError: if a training image has a degenerate percentile
            span or the averaged mode does not fall strictly between s1 and s2.
    """
    imgs: Sequence[ImageGrid] = list(images)
    if len(imgs) < 2:
        raise MetricsError("pl_fit needs at least 2 training images")
    lows, highs, modes = [], [], []
    for img in imgs:
        stats = compute_stats(img)
        lo = stats.percentile(p_low)
        hi = stats.percentile(p_high)
        if hi <= lo:
            raise DegenerateInputError("training image has a degenerate percentile span")
        lows.append(lo)
        highs.append(hi)
        modes.append((_foreground_mode(img), lo, hi))
    s1 = float(np.mean(lows))
    s2 = float(np.mean(highs))
    mapped = [s1 + (m - lo) / (hi - lo) * (s2 - s1) for m, lo, hi in modes]
    m_s = float(np.mean(mapped))
    if not s1 < m_s < s2:
        raise DegenerateInputError(
            "averaged mode landmark falls outside the standard percentile span"
        )
    return PLModel(s1=s1, m_s=m_s, s2=s2, p_low=p_low, p_high=p_high)


def pl_apply(image: ImageGrid, model: PLModel) -> ImageGrid:
    """Two-piece linear map onto the model's standard scale, clamped to [s1, s2].

    [I_p_low, mode] maps to [s1, m_s] and [mode, I_p_high] to [m_s, s2]. If
    the image mode coincides with a percentile endpoint the map degrades to a
    single linear piece (logged).
    """
    stats = compute_stats(image)
    lo = stats.percentile(model.p_low)
    hi = stats.percentile(model.p_high)
    if hi <= lo:
        raise DegenerateInputError("image has a degenerate percentile span for PL")
    mode = _foreground_mode(image)
    if not lo < mode < hi:
        logger.warning(
            "PL mode %.6g coincides with a percentile endpoint [%.6g, %.6g]; "
            "falling back to a single linear piece",
            mode,
            lo,
            hi,
        )
        xp = np.array([lo, hi])
        fp = np.array([model.s1, model.s2])
    else:
        xp = np.array([lo, mode, hi])
        fp = np.array([model.s1, model.m_s, model.s2])
    out = np.interp(image.data, xp, fp)
    return ImageGrid(out, spacing=image.spacing)


@dataclass(frozen=True)
class NormalizationSpec:
    """Method tag plus parameters, parseable from the shared CLI grammar."""

    method: str = "none"
    target_range: Tuple[float, float] = (0.0, 1.0)
    clip_percentiles: Tuple[float, float] = (5.0, 95.0)
    bins: int = 256
    pl_model: Optional[PLModel] = None

    def __post_init__(self):
        if self.method not in NORMALIZATION_METHODS:
            raise MetricsError(f"unknown normalization method {self.method!r}")
        j1, j2 = self.target_range
        if not j1 < j2:
            raise MetricsError("target range needs j1 < j2")
        p, q = self.clip_percentiles
        if not 0.0 <= p < q <= 100.0:
            raise MetricsError("clip percentiles need 0 <= p < q <= 100")
        if self.bins < 2:
            raise MetricsError("binning needs at least 2 bins")
        if self.method == "pl" and self.pl_model is None:
            raise MetricsError("pl normalization needs a trained PLModel")

    @classmethod
    def parse(cls, text: str, **overrides) -> "NormalizationSpec":
        """Parse CLI spellings: none|minmax|cminmax|zscore|quantile|binning|pl:<model-path>."""
        if text.startswith("pl:"):
            return cls(method="pl", pl_model=PLModel.load(text.split(":", 1)[1]), **overrides)
        return cls(method=text, **overrides)

    def label(self) -> str:
        return self.method


def apply_normalization(image: ImageGrid, spec: NormalizationSpec) -> ImageGrid:
    """Dispatch one image through the method named by ``spec``."""
    if spec.method == "none":
        return image
    if spec.method == "minmax":
        j1, j2 = spec.target_range
        return minmax(image, j1=j1, j2=j2)
    if spec.method == "cminmax":
        p, q = spec.clip_percentiles
        j1, j2 = spec.target_range
        return cminmax(image, p=p, q=q, j1=j1, j2=j2)
    if spec.method == "zscore":
        return zscore(image)
    if spec.method == "quantile":
        return quantile_norm(image)
    if spec.method == "binning":
        return binning(image, bins=spec.bins)
    return pl_apply(image, spec.pl_model)
