"""Non-reference quality metrics computed from a single image.

Blurriness: blur effect (re-blur gradient loss), blur ratio / mean blur
(inverse-blurriness rule), variance of Laplacian, traced blurred edge widths,
just-noticeable-blur pooling and the cumulative probability of blur
detection. MR acquisition quality: mean line correlation and mean shifted
line correlation. Noisiness: mean total variation.

Edge-threshold metrics (BR/MB, BEW, JNB, CPBD) take a data-range parameter L
so the 8-bit thresholds they were designed with transfer to arbitrary float
ranges; when omitted, L defaults to the image's own range.
"""

from __future__ import annotations

import math
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import ndimage

from .edges import canny, trace_widths
from .errors import DegenerateInputError, MetricsError
from .filters import laplacian
from .grid import ImageGrid

__all__ = [
    "blur_effect",
    "blur_ratio_mean_blur",
    "variance_of_laplacian",
    "blurred_edge_widths",
    "jnb",
    "cpbd",
    "mlc",
    "mslc",
    "mtv",
]

CANNY_LOW_FRACTION = 0.1
CANNY_HIGH_FRACTION = 0.2
JNB_BLOCK = 64
JNB_EDGE_FRACTION = 0.002
JNB_BETA = 3.6
CPBD_PROBABILITY = 0.63


def _own_range(image: ImageGrid, data_range: Optional[float]) -> float:
    if data_range is not None:
        value = float(data_range)
        if not math.isfinite(value) or value <= 0.0:
            raise DegenerateInputError(f"data range must be positive, got {value}")
        return value
    rng = float(image.data.max() - image.data.min())
    if rng <= 0.0:
        raise DegenerateInputError("constant image has no usable data range")
    return rng


def blur_effect(image: ImageGrid, kernel: int = 11) -> float:
    """Blur effect in [0, 1]: 0 for sharp content, towards 1 when re-blurring
    with a uniform kernel barely changes the gradients."""
    data = image.data
    scores = []
    for axis in (0, 1):
        reblur = ndimage.uniform_filter1d(data, size=kernel, axis=axis, mode="reflect")
        d = np.abs(np.diff(data, axis=axis))
        d_blur = np.abs(np.diff(reblur, axis=axis))
        total = float(d.sum())
        if total == 0.0:
            raise DegenerateInputError("blur effect is undefined for a constant image")
        lost = float(np.maximum(0.0, d - d_blur).sum())
        scores.append((total - lost) / total)
    return float(max(scores))


def blur_ratio_mean_blur(
    image: ImageGrid, t_ib: float = 0.1, data_range: Optional[float] = None
) -> Dict[str, float]:
    """Blur ratio (BR) and mean blur (MB) from the inverse-blurriness rule.

    Intensities are first rescaled by L onto a (0, 255)-equivalent range.
    Per dimension, edge candidates are pixels whose forward-difference
    gradient exceeds the image mean gradient and is a local maximum; the
    inverse blurriness relates a pixel to half the absolute difference of
    its two neighbors. A pixel is blurred when its largest inverse
    blurriness stays below ``t_ib``. A zero neighbor difference makes the
    ratio infinite (never blurred) and drops the pixel from the MB sum.

    Returns:
        {"br": blurred pixels / edge pixels, "mb": summed finite inverse
        blurriness / blurred pixel count (0 when nothing is blurred)}.
    """
    L = _own_range(image, data_range)
    x = (image.data - image.data.min()) * (255.0 / L)
    h, w = x.shape
    edge_union = np.zeros((h, w), dtype=bool)
    ib_max = np.full((h, w), -np.inf)
    for axis in (0, 1):
        a = x if axis == 0 else x.T
        d = np.zeros_like(a)
        d[:-1, :] = np.abs(np.diff(a, axis=0))
        mean_grad = float(d.mean())
        cand = np.where(d > mean_grad, d, 0.0)
        edge = np.zeros_like(a, dtype=bool)
        edge[1:-1, :] = (cand[1:-1, :] > cand[:-2, :]) & (cand[1:-1, :] > cand[2:, :])
        edge &= cand > 0.0
        half_gap = np.full_like(a, np.nan)
        half_gap[1:-1, :] = 0.5 * np.abs(a[:-2, :] - a[2:, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ib = np.abs(a - half_gap) / half_gap
        ib[~np.isfinite(ib)] = np.inf
        if axis == 1:
            edge = edge.T
            ib = ib.T
        edge_union |= edge
        ib_max = np.maximum(ib_max, ib)
    n_edges = int(edge_union.sum())
    if n_edges == 0:
        raise DegenerateInputError("no edge pixels; blur ratio is undefined")
    blurred = ib_max < t_ib
    n_blurred = int(blurred.sum())
    br = n_blurred / n_edges
    if n_blurred == 0:
        return {"br": br, "mb": 0.0}
    finite = np.isfinite(ib_max)
    mb = float(ib_max[finite].sum()) / n_blurred
    return {"br": br, "mb": mb}


def variance_of_laplacian(image: ImageGrid) -> float:
    """Population variance of the 3x3 five-point Laplacian response."""
    response = laplacian(image.data)
    return float(np.var(response))


def _canny_per_dim(image: ImageGrid, data_range: Optional[float]):
    L = _own_range(image, data_range)
    return canny(image.data, t_low=CANNY_LOW_FRACTION * L, t_high=CANNY_HIGH_FRACTION * L)


def blurred_edge_widths(image: ImageGrid, data_range: Optional[float] = None) -> float:
    """Mean traced edge width in pixels, averaged over dimensions.

    Canny edges (thresholds 0.1*L / 0.2*L) are split by dominant gradient
    dimension and traced along it; an ideal step scores width 2 (one sample
    per side).
    """
    result = _canny_per_dim(image, data_range)
    per_dim_means = []
    for axis in (0, 1):
        mask = result.per_dim[axis]
        if not mask.any():
            continue
        widths = trace_widths(image.data, mask, axis=axis)
        per_dim_means.append(float(np.nanmean(widths[mask])))
    if not per_dim_means:
        raise DegenerateInputError("no edge pixels; blurred edge width is undefined")
    return float(np.mean(per_dim_means))


def _width_map(image: ImageGrid, result) -> np.ndarray:
    """Per-pixel edge widths, traced along each pixel's dominant dimension."""
    widths = np.full(image.shape, np.nan)
    for axis in (0, 1):
        mask = result.per_dim[axis]
        if mask.any():
            traced = trace_widths(image.data, mask, axis=axis)
            widths[mask] = traced[mask]
    return widths


def jnb_width(contrast: float, data_range: float) -> float:
    """Just-noticeable blur width of a block: 5 for low contrast (at or
    below 50/255 of the data range), else 3."""
    return 5.0 if contrast / data_range <= 50.0 / 255.0 else 3.0


def _processed_blocks(
    image: ImageGrid, data_range: Optional[float], block: int, edge_fraction: float
):
    """Blocks with enough edge pixels, with their jnb width and edge widths."""
    L = _own_range(image, data_range)
    result = _canny_per_dim(image, data_range)
    widths = _width_map(image, result)
    data = image.data
    h, w = data.shape
    blocks = []
    for y0 in range(0, h, block):
        for x0 in range(0, w, block):
            sl = np.s_[y0 : min(y0 + block, h), x0 : min(x0 + block, w)]
            edge_block = result.edges[sl]
            n_pixels = edge_block.size
            if edge_block.sum() / n_pixels <= edge_fraction:
                continue
            tile = data[sl]
            block_widths = widths[sl][edge_block]
            block_widths = block_widths[np.isfinite(block_widths)]
            if block_widths.size == 0:
                continue
            blocks.append((jnb_width(float(tile.max() - tile.min()), L), block_widths))
    return blocks


def jnb(
    image: ImageGrid,
    data_range: Optional[float] = None,
    edge_fraction: float = JNB_EDGE_FRACTION,
    beta: float = JNB_BETA,
    block: int = JNB_BLOCK,
) -> float:
    """Just-noticeable-blur score: per-block beta-norm of width/jnb ratios,
    averaged over processed blocks. Grows as edges widen."""
    blocks = _processed_blocks(image, data_range, block, edge_fraction)
    if not blocks:
        raise DegenerateInputError("no block has enough edge pixels for JNB")
    terms = [
        float(np.sum((bw / jnb_width) ** beta) ** (1.0 / beta)) for jnb_width, bw in blocks
    ]
    return float(np.mean(terms))


def cpbd(
    image: ImageGrid,
    data_range: Optional[float] = None,
    edge_fraction: float = JNB_EDGE_FRACTION,
    beta: float = JNB_BETA,
    block: int = JNB_BLOCK,
) -> float:
    """Cumulative probability of blur detection in [0, 1].

    Fraction of processed edge pixels whose blur-detection probability
    1 - exp(-(W/jnb)^beta) stays at or below 0.63; higher means sharper.
    """
    blocks = _processed_blocks(image, data_range, block, edge_fraction)
    if not blocks:
        raise DegenerateInputError("no processed edge pixels for CPBD")
    below = 0
    total = 0
    for jnb_width, bw in blocks:
        p_blur = 1.0 - np.exp(-((bw / jnb_width) ** beta))
        below += int(np.count_nonzero(p_blur <= CPBD_PROBABILITY))
        total += bw.size
    return below / total


def _pair_correlations(lines_a: np.ndarray, lines_b: np.ndarray) -> Tuple[float, int]:
    """Sum of Pearson correlations over line pairs, skipping constant lines."""
    am = lines_a.mean(axis=1, keepdims=True)
    bm = lines_b.mean(axis=1, keepdims=True)
    da = lines_a - am
    db = lines_b - bm
    va = (da * da).sum(axis=1)
    vb = (db * db).sum(axis=1)
    valid = (va > 0.0) & (vb > 0.0)
    if not valid.any():
        return 0.0, 0
    cov = (da * db).sum(axis=1)
    corr = cov[valid] / np.sqrt(va[valid] * vb[valid])
    return float(corr.sum()), int(valid.sum())


def _line_correlation(image: ImageGrid, row_offset: int, col_offset: int) -> float:
    data = image.data
    h, w = data.shape
    if h < 2 or w < 2:
        raise MetricsError("line correlations need at least 2 rows and 2 columns")
    direction_means = []
    if row_offset > 0:
        n = h - row_offset if row_offset == 1 else h // 2
        s, c = _pair_correlations(data[:n, :], data[row_offset : row_offset + n, :])
        if c:
            direction_means.append(s / c)
    if col_offset > 0:
        n = w - col_offset if col_offset == 1 else w // 2
        cols = data.T
        s, c = _pair_correlations(cols[:n, :], cols[col_offset : col_offset + n, :])
        if c:
            direction_means.append(s / c)
    if not direction_means:
        raise DegenerateInputError("all line pairs are constant; correlation undefined")
    return float(np.mean(direction_means))


def mlc(image: ImageGrid) -> float:
    """Mean correlation of directly neighboring rows and columns, averaged
    over both directions; constant lines are skipped with count adjustment."""
    return _line_correlation(image, row_offset=1, col_offset=1)


def mslc(image: ImageGrid) -> float:
    """Mean correlation of rows/columns half the image apart (floor(h/2),
    floor(w/2)); sensitive to even-symmetric ghosts and periodic stripes."""
    h, w = image.shape
    return _line_correlation(image, row_offset=h // 2, col_offset=w // 2)


def mtv(image: ImageGrid) -> float:
    """Mean L2-normed forward-difference gradient; the last row/column
    differences are zero-padded."""
    data = image.data
    gy = np.zeros_like(data)
    gx = np.zeros_like(data)
    gy[:-1, :] = np.diff(data, axis=0)
    gx[:, :-1] = np.diff(data, axis=1)
    return float(np.mean(np.hypot(gy, gx)))
