"""Seeded synthetic brain-like phantoms for self-contained tests and benchmarks.

Layout mimics preprocessed brain MR slices: an exactly-zero background, an
elliptical head of nested low-contrast tissue rings, a thin bright shell
along the head boundary, vessel-like streaks that fade inward from the
shell, and one small bright lesion confined to a single lateral half. A
smooth modulation field, a short-wavelength ripple and pixel noise keep
texture statistics non-trivial. All intensities are integer-valued floats on
a 16-bit-like scale; the design constants below are frozen so golden outputs
stay stable.
"""

from __future__ import annotations

import numpy as np

from .errors import MetricsError
from .grid import ImageGrid

__all__ = ["make_phantom"]

# frozen design constants
_HEAD_AXES = (0.42, 0.46)          # semi-axes as fraction of width/height
_RING_LEVEL_BASE = 22000.0         # innermost tissue intensity ladder start
_RING_LEVEL_STEP = 1500.0          # low tissue contrast, like gray/white matter
_SHELL_LEVEL = 48000.0             # thin bright rim, keeps boundary edges strong
_SHELL_WIDTH = 2.5                 # pixels
_LESION_LEVEL = 62000.0
_LESION_RADIUS = 0.045             # fraction of min(width, height)
_STREAK_COUNT = 7                  # vessel-like streaks rooted at the shell
_STREAK_DELTA = (12000.0, 8200.0)  # brightness above tissue, shell end to tip
_STREAK_HALF_WIDTH = 1.0           # pixels
_TEXTURE_AMPLITUDE = 0.022         # relative modulation of tissue levels
_TEXTURE_WAVES = 4
_RIPPLE_AMPLITUDE = 500.0          # short-wavelength ripple, intensity units
_RIPPLE_WAVELENGTH = 6.0           # pixels; survives the blur sweep
_NOISE_SIGMA = 220.0               # additive iid noise, intensity units
_MAX_INTENSITY = 65535.0


def make_phantom(seed: int, width: int = 240, height: int = 240) -> ImageGrid:
    """Generate a deterministic brain-like phantom.

    Args:
        seed: RNG seed; identical seeds yield bit-identical phantoms.
        width: raster width, at least 64.
        height: raster height, at least 64.

    Returns:
        ImageGrid with exact-zero background (over 30% of pixels) and
        integer-valued foreground intensities in [1, 65535].
    """
    if width < 64 or height < 64:
        raise MetricsError("phantom needs width and height >= 64")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)

    cx = width / 2.0 * (1.0 + 0.04 * (rng.random() - 0.5))
    cy = height / 2.0 * (1.0 + 0.04 * (rng.random() - 0.5))
    ax = _HEAD_AXES[0] * width * (1.0 + 0.05 * (rng.random() - 0.5))
    ay = _HEAD_AXES[1] * height * (1.0 + 0.05 * (rng.random() - 0.5))

    n_rings = int(rng.integers(4, 7))
    levels = _RING_LEVEL_BASE + _RING_LEVEL_STEP * np.arange(n_rings)
    levels = levels + rng.uniform(-200.0, 200.0, size=n_rings)
    shrink = np.linspace(1.0, 0.80, n_rings)

    base = np.zeros((height, width), dtype=np.float64)
    for k in range(n_rings):
        # the outermost ring is the head outline itself; inner rings jitter
        jx = cx if k == 0 else cx + rng.uniform(-0.015, 0.015) * width
        jy = cy if k == 0 else cy + rng.uniform(-0.015, 0.015) * height
        r2 = ((xx - jx) / (ax * shrink[k])) ** 2 + ((yy - jy) / (ay * shrink[k])) ** 2
        base[r2 <= 1.0] = levels[k]

    head = base > 0.0

    # thin bright shell along the head boundary
    r2_inner = ((xx - cx) / (ax - _SHELL_WIDTH)) ** 2 + ((yy - cy) / (ay - _SHELL_WIDTH)) ** 2
    shell = head & (r2_inner > 1.0)
    base[shell] = _SHELL_LEVEL

    # vessel-like streaks: rooted at the shell, fading toward the interior
    streak = np.zeros_like(base)
    for _ in range(_STREAK_COUNT):
        theta = rng.uniform(0.0, 2.0 * np.pi)
        sx = cx + (ax - _SHELL_WIDTH) * np.cos(theta)
        sy = cy + (ay - _SHELL_WIDTH) * np.sin(theta)
        reach = rng.uniform(0.75, 0.85)
        ex = cx + (1.0 - reach) * (sx - cx)
        ey = cy + (1.0 - reach) * (sy - cy)
        vx, vy = ex - sx, ey - sy
        norm2 = vx * vx + vy * vy
        t = np.clip(((xx - sx) * vx + (yy - sy) * vy) / norm2, 0.0, 1.0)
        dist = np.hypot(xx - (sx + t * vx), yy - (sy + t * vy))
        lane = dist <= _STREAK_HALF_WIDTH
        delta = _STREAK_DELTA[0] + t * (_STREAK_DELTA[1] - _STREAK_DELTA[0])
        streak[lane] = np.maximum(streak[lane], delta[lane])
    # streaks live on tissue only; they stop at (and stay adjacent to) the shell
    streak[~head | shell] = 0.0

    # one bright lesion strictly inside one lateral half
    r_les = _LESION_RADIUS * min(width, height) * (1.0 + 0.3 * (rng.random() - 0.5))
    side = 1.0 if rng.random() < 0.5 else -1.0
    lx = cx + side * (0.13 + 0.12 * rng.random()) * width
    ly = cy + (rng.random() - 0.5) * 0.36 * height
    lesion = ((xx - lx) ** 2 + (yy - ly) ** 2) <= r_les**2
    lesion &= head

    # smooth multiplicative texture: a few seeded plane waves
    texture = np.zeros_like(base)
    for _ in range(_TEXTURE_WAVES):
        theta = rng.uniform(0.0, np.pi)
        wavelength = rng.uniform(18.0, 60.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        kx = np.cos(theta) * 2.0 * np.pi / wavelength
        ky = np.sin(theta) * 2.0 * np.pi / wavelength
        texture += np.cos(kx * xx + ky * yy + phase)
    texture *= _TEXTURE_AMPLITUDE / np.sqrt(_TEXTURE_WAVES)

    ripple_theta = rng.uniform(0.2, np.pi - 0.2)
    ripple_phase = rng.uniform(0.0, 2.0 * np.pi)
    kr = 2.0 * np.pi / _RIPPLE_WAVELENGTH
    ripple = _RIPPLE_AMPLITUDE * np.cos(
        kr * (np.cos(ripple_theta) * xx + np.sin(ripple_theta) * yy) + ripple_phase
    )

    noise = rng.normal(0.0, _NOISE_SIGMA, size=base.shape)
    out = base * (1.0 + texture) + streak + ripple + noise
    out[lesion] = _LESION_LEVEL + noise[lesion] * 2.0
    out[head] = np.clip(np.round(out[head]), 1.0, _MAX_INTENSITY)
    out[~head] = 0.0
    return ImageGrid(out)
