"""Complex steerable pyramid bands, built with FFT-domain masks.

Bands are analytic (one-sided angular masks), so coefficient phase encodes
local spatial shift. Only the orientation bands of the requested octave are
returned, at full resolution; masks are cached per raster shape.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np

from .errors import MetricsError

__all__ = ["steerable_bands"]

_mask_cache: Dict[Tuple[int, int, int, int], List[np.ndarray]] = {}


def _polar_grid(height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    fy = (np.arange(height) - height // 2) / (height / 2.0)
    fx = (np.arange(width) - width // 2) / (width / 2.0)
    gy, gx = np.meshgrid(fy, fx, indexing="ij")
    rad = np.hypot(gy, gx)
    rad[height // 2, width // 2] = rad[height // 2, width // 2 - 1]
    return np.log2(rad), np.arctan2(gy, gx)


def _rise(t: np.ndarray) -> np.ndarray:
    """Raised-cosine high-pass transition: 0 below t=-1, 1 above t=0."""
    return np.cos(0.5 * np.pi * np.clip(-t, 0.0, 1.0))


def _fall(t: np.ndarray) -> np.ndarray:
    """Complementary low-pass transition with rise^2 + fall^2 == 1."""
    return np.sin(0.5 * np.pi * np.clip(-t, 0.0, 1.0))


def _band_masks(height: int, width: int, levels: int, orientations: int) -> List[np.ndarray]:
    key = (height, width, levels, orientations)
    cached = _mask_cache.get(key)
    if cached is not None:
        return cached
    log_rad, angle = _polar_grid(height, width)
    radial = _fall(log_rad)
    for j in range(1, levels):
        radial = radial * _fall(log_rad + j)
    radial = radial * _rise(log_rad + levels)

    order = orientations - 1
    masks = []
    for b in range(orientations):
        delta = np.mod(angle - np.pi * b / orientations + np.pi, 2.0 * np.pi) - np.pi
        lobe = np.where(np.abs(delta) < 0.5 * np.pi, np.cos(delta) ** order, 0.0)
        masks.append(radial * lobe)
    _mask_cache[key] = masks
    return masks


def steerable_bands(
    data: np.ndarray, levels: int = 2, orientations: int = 16
) -> List[np.ndarray]:
    """Complex orientation bands of the ``levels``-th octave below Nyquist.

    Args:
        data: 2D float array.
        levels: pyramid depth; the returned bands live one octave per level
            below the Nyquist ring.
        orientations: number of angular bands.

    Returns:
        List of complex64-bit arrays, one per orientation, same shape as data.
    """
    if levels < 1 or orientations < 2:
        raise MetricsError("pyramid needs levels >= 1 and orientations >= 2")
    height, width = data.shape
    if min(height, width) < 2 ** (levels + 3):
        raise MetricsError(
            f"image {height}x{width} is smaller than the pyramid support "
            f"({2 ** (levels + 3)} pixels per side for {levels} levels)"
        )
    spectrum = np.fft.fftshift(np.fft.fft2(data))
    return [
        np.fft.ifft2(np.fft.ifftshift(spectrum * mask))
        for mask in _band_masks(height, width, levels, orientations)
    ]
