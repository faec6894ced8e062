"""Image container, intensity statistics and data-range semantics.

All pixel math in this package runs on :class:`ImageGrid`, a 2D raster of
64-bit reals. Intensities are stored as float64 regardless of the source bit
depth so that metric accumulations do not pick up single-precision error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError, MetricsError

__all__ = [
    "ImageGrid",
    "LabelMask",
    "IntensityStats",
    "DataRangeMode",
    "compute_stats",
    "resolve_data_range",
]


class ImageGrid:
    """Immutable 2D float raster with optional pixel spacing in mm.

    Args:
        data: 2D array-like of intensities, row-major. All values must be
            finite; NaN/Inf are rejected at construction.
        spacing: optional (dx, dy) pixel spacing in mm.
    """

    __slots__ = ("_data", "spacing")

    def __init__(self, data, spacing: Optional[Tuple[float, float]] = None):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise MetricsError(f"expected 2D raster, got {arr.ndim}D")
        if arr.size == 0:
            raise MetricsError("empty image")
        if not np.all(np.isfinite(arr)):
            raise MetricsError("image contains non-finite intensities")
        arr.setflags(write=False)
        self._data = arr
        self.spacing = spacing

    @property
    def data(self) -> np.ndarray:
        """Read-only (height, width) float64 array."""
        return self._data

    @property
    def width(self) -> int:
        return self._data.shape[1]

    @property
    def height(self) -> int:
        return self._data.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self._data.shape

    def __repr__(self) -> str:
        return f"ImageGrid({self.height}x{self.width})"


class LabelMask:
    """Integer class-id raster; 0 is background."""

    __slots__ = ("_labels",)

    def __init__(self, labels):
        arr = np.ascontiguousarray(labels)
        if arr.ndim != 2:
            raise MetricsError(f"expected 2D label mask, got {arr.ndim}D")
        if arr.size == 0:
            raise MetricsError("empty label mask")
        if not np.issubdtype(arr.dtype, np.integer):
            flt = np.asarray(arr, dtype=np.float64)
            if not np.all(np.isfinite(flt)) or np.any(flt != np.round(flt)):
                raise MetricsError("label mask must hold integer class ids")
            arr = flt.astype(np.int64)
        else:
            arr = arr.astype(np.int64)
        if arr.min() < 0:
            raise MetricsError("label ids must be non-negative")
        arr.setflags(write=False)
        self._labels = arr

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def width(self) -> int:
        return self._labels.shape[1]

    @property
    def height(self) -> int:
        return self._labels.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self._labels.shape


@dataclass(frozen=True)
class IntensityStats:
    """First-order statistics of one image.

    ``std`` is the corrected sample standard deviation (divisor N-1; 0 for a
    single pixel). Percentiles use the nearest-rank rule: the k-th percentile
    is the smallest intensity value such that at least k% of all pixels are
    lower or equal.
    """

    min: float
    max: float
    mean: float
    std: float
    median: float
    _sorted: np.ndarray = field(repr=False)

    def percentile(self, k: float) -> float:
        if not 0.0 <= k <= 100.0:
            raise MetricsError(f"percentile rank must be in [0, 100], got {k}")
        n = self._sorted.size
        rank = math.ceil(k / 100.0 * n)
        idx = max(rank, 1) - 1
        return float(self._sorted[idx])


def compute_stats(image: ImageGrid) -> IntensityStats:
    """Compute :class:`IntensityStats` for a non-empty image."""
    values = np.sort(image.data, axis=None)
    n = values.size
    std = float(np.std(values, ddof=1)) if n > 1 else 0.0
    stats = IntensityStats(
        min=float(values[0]),
        max=float(values[-1]),
        mean=float(np.mean(values)),
        std=std,
        median=0.0,
        _sorted=values,
    )
    # nearest-rank median, not the interpolating np.median
    object.__setattr__(stats, "median", stats.percentile(50.0))
    return stats


@dataclass(frozen=True)
class DataRangeMode:
    """How the data-range parameter L is resolved for range-dependent metrics.

    Modes: ``per-image`` (L from one image's extrema), ``pair`` (joint extrema
    of two images), ``dataset`` (global extrema over a set), ``fixed`` (given
    constant). For images I, R in a dataset D the resolved ranges satisfy
    L_per_image <= L_pair <= L_dataset.
    """

    kind: str
    value: Optional[float] = None

    _KINDS = ("per-image", "pair", "dataset", "fixed")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise MetricsError(f"unknown data-range mode {self.kind!r}")
        if self.kind == "fixed":
            if self.value is None or not math.isfinite(self.value) or self.value <= 0:
                raise MetricsError("fixed data range needs a positive finite value")
        elif self.value is not None:
            raise MetricsError(f"mode {self.kind!r} takes no value")

    @classmethod
    def per_image(cls) -> "DataRangeMode":
        return cls("per-image")

    @classmethod
    def pair(cls) -> "DataRangeMode":
        return cls("pair")

    @classmethod
    def dataset(cls) -> "DataRangeMode":
        return cls("dataset")

    @classmethod
    def fixed(cls, value: float) -> "DataRangeMode":
        return cls("fixed", float(value))

    @classmethod
    def parse(cls, text: str) -> "DataRangeMode":
        """Parse CLI spellings: per-image | pair | dataset | fixed:<value>."""
        if text.startswith("fixed:"):
            try:
                return cls.fixed(float(text.split(":", 1)[1]))
            except ValueError as exc:
                raise MetricsError(f"bad fixed data range {text!r}") from exc
        return cls(text)

    def __str__(self) -> str:
        if self.kind == "fixed":
            return f"fixed:{self.value!r}"
        return self.kind


def resolve_data_range(mode: DataRangeMode, images: Iterable[ImageGrid] | ImageGrid) -> float:
    """Resolve the data-range parameter L for one or more images.

    Raises:
        DegenerateInputError: if the resolved range is zero (all inputs
            constant and equal), so callers can pick an explicit fallback.
        MetricsError: on an image-count / mode mismatch.
    """
    if isinstance(images, ImageGrid):
        images = [images]
    imgs: Sequence[ImageGrid] = list(images)
    if mode.kind == "fixed":
        return float(mode.value)
    if not imgs:
        raise MetricsError("resolve_data_range needs at least one image")
    if mode.kind == "per-image":
        if len(imgs) != 1:
            raise MetricsError("per-image mode takes exactly one image")
    elif mode.kind == "pair":
        if len(imgs) != 2:
            raise MetricsError("pair mode takes exactly two images")
    lo = min(float(img.data.min()) for img in imgs)
    hi = max(float(img.data.max()) for img in imgs)
    rng = hi - lo
    if rng <= 0.0:
        raise DegenerateInputError(
            "degenerate data range: all inputs are constant and equal"
        )
    return rng


def require_same_shape(a, b) -> None:
    """Raise :class:`DimensionMismatchError` unless a and b share a shape."""
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
