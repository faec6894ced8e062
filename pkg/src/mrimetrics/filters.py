"""Shared small-kernel filtering helpers.

Boundary handling is symmetric everywhere (edge pixel mirrored, scipy mode
``reflect``), which keeps windowed statistics full-size on small rasters.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

__all__ = [
    "gaussian_kernel1d",
    "gaussian_filter2d",
    "uniform_filter2d",
    "laplacian",
    "downsample2",
]


def gaussian_kernel1d(size: int, sigma: float) -> np.ndarray:
    """Normalized 1D Gaussian sampled on ``size`` integer taps."""
    if size < 1 or size % 2 == 0:
        raise ValueError(f"kernel size must be odd and positive, got {size}")
    half = size // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_filter2d(arr: np.ndarray, size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Separable Gaussian smoothing with symmetric boundaries."""
    k = gaussian_kernel1d(size, sigma)
    out = ndimage.correlate1d(np.asarray(arr, dtype=np.float64), k, axis=0, mode="reflect")
    return ndimage.correlate1d(out, k, axis=1, mode="reflect")


def uniform_filter2d(arr: np.ndarray, size: int) -> np.ndarray:
    """Box mean filter with symmetric boundaries."""
    return ndimage.uniform_filter(np.asarray(arr, dtype=np.float64), size=size, mode="reflect")


_LAPLACE_STENCIL = np.array(
    [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]], dtype=np.float64
)


def laplacian(arr: np.ndarray) -> np.ndarray:
    """Five-point Laplacian response, symmetric boundaries."""
    return ndimage.convolve(np.asarray(arr, dtype=np.float64), _LAPLACE_STENCIL, mode="reflect")


def downsample2(arr: np.ndarray, size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Gaussian low-pass followed by 2x2 mean pooling (odd trailing row/column dropped)."""
    low = gaussian_filter2d(arr, size=size, sigma=sigma)
    h2 = (low.shape[0] // 2) * 2
    w2 = (low.shape[1] // 2) * 2
    low = low[:h2, :w2]
    return 0.25 * (low[0::2, 0::2] + low[1::2, 0::2] + low[0::2, 1::2] + low[1::2, 1::2])
