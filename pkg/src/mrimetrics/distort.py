"""Seeded, strength-parameterized distortion simulators.

Eleven kinds cover spatial misalignment (translation, elastic deformation),
intensity remapping (gamma high/low, intensity shift), MR acquisition
artifacts injected in k-space (ghosting, stripe, bias field) and generic
degradations (Gaussian blur, Gaussian noise, mirror-replace). Strength is a
real in [1, 5]; each kind's parameters interpolate linearly between frozen
endpoints (gamma in log space). All randomness is derived from the spec seed,
so application is a pure function of (image, spec).

Spectrum conventions: forward FFT unnormalized, inverse scaled by 1/(w*h),
centering by half-size circular shift (center index = size // 2). Spectrum
edits are applied to conjugate-symmetric bin pairs so the output stays real.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .errors import MetricsError
from .filters import gaussian_kernel1d
from .grid import ImageGrid

__all__ = [
    "KINDS",
    "PARAM_TABLE",
    "DistortionSpec",
    "interpolate_param",
    "apply",
    "sweep",
    "derive_seed",
]

# table order follows the result tables
KINDS = (
    "bias_field",
    "ghosting",
    "stripe_artifact",
    "gaussian_blur",
    "gaussian_noise",
    "replace_artifact",
    "gamma_high",
    "gamma_low",
    "shift_intensity",
    "translation",
    "elastic_deform",
)

# frozen (strength 1, strength 5) endpoints per scalar parameter
PARAM_TABLE: Dict[str, Tuple[Tuple[str, float, float], ...]] = {
    "bias_field": (("c", 0.5, 10.0),),
    "elastic_deform": (("n", 18.0, 11.0), ("d", 0.03, 0.1)),
    "gamma_low": (("log_gamma", -0.01, -0.916),),
    "gamma_high": (("log_gamma", 0.095, 0.916),),
    "gaussian_blur": (("sigma", 0.2, 1.3),),
    "gaussian_noise": (("sigma", 0.005, 0.05),),
    "ghosting": (("intensity", 0.05, 0.4),),
    "replace_artifact": (("fraction", 0.1, 1.0),),
    "shift_intensity": (("fraction", 0.05, 0.25),),
    "stripe_artifact": (("intensity", 0.05, 0.5),),
    "translation": (("fraction", 0.01, 0.2),),
}

STRIPE_OFFSET_FRACTION = 0.3  # of the half-extent, along both spectrum axes


def _check_strength(strength: float) -> None:
    if not 1.0 <= strength <= 5.0:
        raise MetricsError(f"strength must lie in [1, 5], got {strength}")


def interpolate_param(kind: str, strength: float) -> Dict[str, float]:
    """Linear interpolation of a kind's parameters between its endpoints.

    Gamma kinds interpolate in log gamma and report the exponentiated value
    under the key "gamma".
    """
    if kind not in PARAM_TABLE:
        raise MetricsError(f"unknown distortion kind {kind!r}")
    _check_strength(strength)
    t = (strength - 1.0) / 4.0
    values = {name: p1 + t * (p5 - p1) for name, p1, p5 in PARAM_TABLE[kind]}
    if "log_gamma" in values:
        values["gamma"] = math.exp(values.pop("log_gamma"))
    return values


@dataclass(frozen=True)
class DistortionSpec:
    """Distortion kind, continuous strength in [1, 5] and RNG seed."""

    kind: str
    strength: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PARAM_TABLE:
            raise MetricsError(f"unknown distortion kind {self.kind!r}")
        _check_strength(self.strength)


def derive_seed(master_seed: int, kind: str, strength_index: int) -> int:
    """Deterministic per-(kind, strength) seed: master XOR blake2b(kind:index)."""
    digest = hashlib.blake2b(f"{kind}:{strength_index}".encode("ascii"), digest_size=8)
    return (int(master_seed) ^ int.from_bytes(digest.digest(), "little")) & (2**64 - 1)


def apply(image: ImageGrid, spec: DistortionSpec) -> ImageGrid:
    """Apply one distortion; pure function of (image, spec)."""
    params = interpolate_param(spec.kind, spec.strength)
    handler = _HANDLERS[spec.kind]
    return ImageGrid(handler(image.data, params, spec.seed), spacing=image.spacing)


def sweep(
    image: ImageGrid,
    kinds: Sequence[str] = KINDS,
    strengths: Iterable[float] = (1.0, 2.0, 3.0, 4.0, 5.0),
    seed: int = 0,
) -> List[Tuple[DistortionSpec, ImageGrid]]:
    """All (kind, strength) combinations with derived per-tuple seeds."""
    strengths = list(strengths)
    out = []
    for kind in kinds:
        for idx, s in enumerate(strengths):
            spec = DistortionSpec(kind=kind, strength=s, seed=derive_seed(seed, kind, idx))
            out.append((spec, apply(image, spec)))
    return out


def _bias_field(data, params, seed):
    h, w = data.shape
    u = (np.arange(h) / (h - 1))[:, None]
    v = (np.arange(w) / (w - 1))[None, :]
    poly = 10.0 * u * u * (u - 1.0) * (v - 0.5) * v * (v - 1.0)
    return data * np.exp(params["c"] * poly)


def _centered_spectrum(data):
    return np.fft.fftshift(np.fft.fft2(data))


def _invert_spectrum(spectrum):
    out = np.fft.ifft2(np.fft.ifftshift(spectrum))
    return out.real


def _ghosting(data, params, seed):
    h, w = data.shape
    scale = np.where(np.arange(h) % 2 == 0, params["intensity"], 1.0)
    # pair rows with their conjugate mirrors so the output stays real
    mirror = (h - np.arange(h)) % h
    scale = np.where(scale[mirror] == scale, scale, 1.0)
    scale[h // 2] = 1.0
    spectrum = _centered_spectrum(data) * scale[:, None]
    return _invert_spectrum(spectrum)


def _stripe_artifact(data, params, seed):
    h, w = data.shape
    spectrum = _centered_spectrum(data)
    dy = int(round(STRIPE_OFFSET_FRACTION * (h // 2)))
    dx = int(round(STRIPE_OFFSET_FRACTION * (w // 2)))
    if dy == 0 and dx == 0:
        raise MetricsError("image too small to place the stripe bin off-center")
    y = h // 2 + dy
    x = w // 2 + dx
    value = params["intensity"] * np.abs(spectrum).max()
    spectrum[y, x] = value
    spectrum[(h - y) % h, (w - x) % w] = value
    return _invert_spectrum(spectrum)


def _gaussian_blur(data, params, seed):
    sigma = params["sigma"]
    radius = max(1, int(math.ceil(4.0 * sigma)))
    k = gaussian_kernel1d(2 * radius + 1, sigma)
    out = ndimage.correlate1d(data, k, axis=0, mode="reflect")
    return ndimage.correlate1d(out, k, axis=1, mode="reflect")


def _gaussian_noise(data, params, seed):
    rng_range = float(data.max() - data.min())
    noise = np.random.default_rng(seed).normal(0.0, params["sigma"] * rng_range, data.shape)
    return data + noise


def _replace_artifact(data, params, seed):
    h = data.shape[0]
    f = params["fraction"]
    ys = np.arange(h)
    band = (ys > h / 2.0) & (ys <= h * (1.0 + f) / 2.0)
    out = data.copy()
    out[band, :] = data[(h - ys)[band], :]
    return out


def _gamma(data, gamma):
    lo = float(data.min())
    hi = float(data.max())
    if hi == lo:
        return data.copy()
    unit = (data - lo) / (hi - lo)
    return unit**gamma * (hi - lo) + lo


def _gamma_high(data, params, seed):
    return _gamma(data, params["gamma"])


def _gamma_low(data, params, seed):
    return _gamma(data, params["gamma"])


def _shift_intensity(data, params, seed):
    return data + params["fraction"] * float(data.max() - data.min())


def _translation(data, params, seed):
    h, w = data.shape
    dy = int(np.rint(params["fraction"] * h))
    dx = int(np.rint(params["fraction"] * w))
    out = np.zeros_like(data)
    if dy < h and dx < w:
        out[: h - dy, : w - dx] = data[dy:, dx:]
    return out


def _elastic_deform(data, params, seed):
    h, w = data.shape
    n = int(round(params["n"]))
    d = params["d"]
    rng = np.random.default_rng(seed)
    disp_y = np.zeros((n, n))
    disp_x = np.zeros((n, n))
    disp_y[1:-1, 1:-1] = rng.normal(0.0, d * h / n, (n - 2, n - 2))
    disp_x[1:-1, 1:-1] = rng.normal(0.0, d * w / n, (n - 2, n - 2))

    grid_y = np.linspace(0.0, h - 1.0, n)
    grid_x = np.linspace(0.0, w - 1.0, n)
    rows = np.arange(h, dtype=np.float64)
    cols = np.arange(w, dtype=np.float64)

    def upsample(grid_vals):
        tmp = np.empty((h, n))
        for j in range(n):
            tmp[:, j] = np.interp(rows, grid_y, grid_vals[:, j])
        full = np.empty((h, w))
        for i in range(h):
            full[i, :] = np.interp(cols, grid_x, tmp[i, :])
        return full

    src_y = np.clip(rows[:, None] + upsample(disp_y), 0.0, h - 1.0)
    src_x = np.clip(cols[None, :] + upsample(disp_x), 0.0, w - 1.0)

    y0 = np.floor(src_y).astype(np.intp)
    x0 = np.floor(src_x).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = src_y - y0
    fx = src_x - x0
    return (
        data[y0, x0] * (1.0 - fy) * (1.0 - fx)
        + data[y1, x0] * fy * (1.0 - fx)
        + data[y0, x1] * (1.0 - fy) * fx
        + data[y1, x1] * fy * fx
    )


_HANDLERS = {
    "bias_field": _bias_field,
    "ghosting": _ghosting,
    "stripe_artifact": _stripe_artifact,
    "gaussian_blur": _gaussian_blur,
    "gaussian_noise": _gaussian_noise,
    "replace_artifact": _replace_artifact,
    "gamma_high": _gamma_high,
    "gamma_low": _gamma_low,
    "shift_intensity": _shift_intensity,
    "translation": _translation,
    "elastic_deform": _elastic_deform,
}
