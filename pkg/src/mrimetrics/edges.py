"""Canny edge detection with per-dimension edge maps, and edge-width tracing.

The gradient operator is a Sobel-style derivative normalized so an ideal unit
step responds with magnitude ~1, which makes absolute thresholds expressed as
fractions of the data range L well behaved. Edge pixels are split by dominant
gradient dimension; widths are traced along that dimension on the raw forward
difference until the sign flips, counting one sample per side minimum (an
ideal step therefore has width 2: one per side).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .filters import gaussian_kernel1d

__all__ = ["CannyEdges", "canny", "trace_widths"]

_SECTOR_SPLIT = 2.4142135623730951  # tan(67.5 degrees)


@dataclass(frozen=True)
class CannyEdges:
    """Edge maps and gradients from one Canny pass.

    edges: final hysteresis-linked edge mask.
    per_dim: (E_0, E_1) boolean maps, edges assigned to their dominant
        gradient dimension (axis 0 wins ties).
    grad: (g_0, g_1) smoothed gradient components.
    """

    edges: np.ndarray
    per_dim: tuple
    grad: tuple


def _shifted(arr: np.ndarray, dy: int, dx: int, fill: float) -> np.ndarray:
    out = np.full_like(arr, fill)
    src_y = slice(max(dy, 0), arr.shape[0] + min(dy, 0))
    src_x = slice(max(dx, 0), arr.shape[1] + min(dx, 0))
    dst_y = slice(max(-dy, 0), arr.shape[0] + min(-dy, 0))
    dst_x = slice(max(-dx, 0), arr.shape[1] + min(-dx, 0))
    out[dst_y, dst_x] = arr[src_y, src_x]
    return out


def canny(data: np.ndarray, t_low: float, t_high: float, sigma: float = 0.8) -> CannyEdges:
    """Canny edges with absolute gradient-magnitude thresholds.

    Args:
        data: 2D float array.
        t_low: weak-edge threshold on gradient magnitude.
        t_high: strong-edge threshold (hysteresis seeds).
        sigma: pre-smoothing scale in pixels.
    """
    k = gaussian_kernel1d(7, sigma)
    smooth = ndimage.correlate1d(np.asarray(data, dtype=np.float64), k, axis=0, mode="reflect")
    smooth = ndimage.correlate1d(smooth, k, axis=1, mode="reflect")
    avg = np.array([0.25, 0.5, 0.25])
    diff = np.array([-1.0, 0.0, 1.0])
    g0 = ndimage.correlate1d(ndimage.correlate1d(smooth, avg, axis=1, mode="reflect"), diff, axis=0, mode="reflect")
    g1 = ndimage.correlate1d(ndimage.correlate1d(smooth, avg, axis=0, mode="reflect"), diff, axis=1, mode="reflect")
    mag = np.hypot(g0, g1)

    a0 = np.abs(g0)
    a1 = np.abs(g1)
    vertical = a0 >= _SECTOR_SPLIT * a1
    horizontal = a1 >= _SECTOR_SPLIT * a0
    diag_main = ~vertical & ~horizontal & (g0 * g1 > 0)
    diag_anti = ~vertical & ~horizontal & ~diag_main

    neg = np.full_like(mag, np.inf)
    pos = np.full_like(mag, np.inf)
    for sector, (dy, dx) in (
        (vertical, (1, 0)),
        (horizontal, (0, 1)),
        (diag_main, (1, 1)),
        (diag_anti, (1, -1)),
    ):
        neg[sector] = _shifted(mag, -dy, -dx, 0.0)[sector]
        pos[sector] = _shifted(mag, dy, dx, 0.0)[sector]
    nms = (mag > neg) & (mag >= pos) & (mag > 0)

    strong = nms & (mag >= t_high)
    weak = nms & (mag >= t_low)
    edges = ndimage.binary_propagation(strong, mask=weak, structure=np.ones((3, 3), bool))
    e0 = edges & (a0 >= a1)
    e1 = edges & ~e0
    return CannyEdges(edges=edges, per_dim=(e0, e1), grad=(g0, g1))


def trace_widths(data: np.ndarray, edge_mask: np.ndarray, axis: int) -> np.ndarray:
    """Edge widths traced along ``axis`` from every flagged pixel.

    From each edge pixel the raw forward difference along the axis is walked
    in both directions while its sign matches the sign at the pixel; each
    side contributes its run length plus one. Returns a float array with NaN
    off the edge mask.
    """
    arr = np.asarray(data, dtype=np.float64)
    if axis == 1:
        arr = arr.T
        edge_mask = edge_mask.T
    n = arr.shape[0]
    fd = np.diff(arr, axis=0)
    sign = np.sign(fd)
    widths = np.full(arr.shape, np.nan)
    ys, xs = np.nonzero(edge_mask)
    for y, x in zip(ys, xs):
        s = sign[y, x] if y < n - 1 else 0.0
        if s == 0.0 and y > 0:
            s = sign[y - 1, x]
        if s == 0.0:
            widths[y, x] = 2.0
            continue
        left = 1
        q = y - 1
        while q >= 0 and sign[q, x] == s:
            left += 1
            q -= 1
        right = 1
        q = y + 1
        while q <= n - 2 and sign[q, x] == s:
            right += 1
            q += 1
        widths[y, x] = float(left + right)
    if axis == 1:
        widths = widths.T
    return widths
