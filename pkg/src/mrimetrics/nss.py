"""Natural-scene-statistics features and the NIQE quality model.

The front end is mean-subtracted contrast normalization (MSCN) with a 7x7
Gaussian local mean/std and stabilizer C. Eighteen features per scale come
from a generalized Gaussian fit to the MSCN coefficients plus asymmetric
generalized Gaussian fits to four orientation products; NIQE stacks two
scales (36 features), fits a multivariate Gaussian over sharp patches of a
pristine corpus, and scores images by the Mahalanobis-style distance
sqrt((nu_R - nu_I)^T ((Sigma_R + Sigma_I)/2)^-1 (nu_R - nu_I)).
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage, special

from .errors import DegenerateInputError, MetricsError
from .filters import downsample2, gaussian_kernel1d
from .grid import ImageGrid

__all__ = [
    "mscn",
    "fit_ggd",
    "fit_aggd",
    "brisque_features",
    "NiqeModel",
    "niqe_fit",
    "niqe_score",
]

MSCN_WINDOW = 7
MSCN_SIGMA = 7.0 / 6.0
NIQE_PATCH = 96
SHARPNESS_PERCENTILE = 75.0

# moment-ratio lookup shared by the GGD and AGGD fits (shape grid 0.2..10)
_SHAPE_GRID = np.arange(0.2, 10.0 + 1e-9, 0.001)
_RATIO_GRID = (
    special.gamma(2.0 / _SHAPE_GRID) ** 2
    / (special.gamma(1.0 / _SHAPE_GRID) * special.gamma(3.0 / _SHAPE_GRID))
)


def _lookup_shape(ratio: float) -> float:
    idx = int(np.argmin(np.abs(_RATIO_GRID - ratio)))
    return float(_SHAPE_GRID[idx])


def mscn(data: np.ndarray, c: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """MSCN coefficients and the local std field.

    Returns:
        (coefficients, sigma_field) where coefficients = (I - mu) / (sigma + c).
    """
    k = gaussian_kernel1d(MSCN_WINDOW, MSCN_SIGMA)

    def smooth(a):
        out = ndimage.correlate1d(a, k, axis=0, mode="reflect")
        return ndimage.correlate1d(out, k, axis=1, mode="reflect")

    arr = np.asarray(data, dtype=np.float64)
    mu = smooth(arr)
    var = np.maximum(smooth(arr * arr) - mu * mu, 0.0)
    sigma = np.sqrt(var)
    return (arr - mu) / (sigma + c), sigma


def fit_ggd(values: np.ndarray) -> Tuple[float, float]:
    """Moment-matched generalized Gaussian fit: (shape, variance)."""
    mean_abs = float(np.mean(np.abs(values)))
    mean_sq = float(np.mean(values * values))
    if mean_sq == 0.0 or mean_abs == 0.0:
        raise DegenerateInputError("GGD fit is undefined for all-zero coefficients")
    shape = _lookup_shape(mean_abs * mean_abs / mean_sq)
    return shape, mean_sq


def fit_aggd(values: np.ndarray) -> Tuple[float, float, float, float]:
    """Asymmetric generalized Gaussian fit: (shape, mean, left var, right var)."""
    left = values[values < 0.0]
    right = values[values > 0.0]
    sigma_l = math.sqrt(float(np.mean(left * left))) if left.size else 0.0
    sigma_r = math.sqrt(float(np.mean(right * right))) if right.size else 0.0
    if sigma_l == 0.0 and sigma_r == 0.0:
        raise DegenerateInputError("AGGD fit is undefined for all-zero products")
    sigma_l = max(sigma_l, 1e-12)
    sigma_r = max(sigma_r, 1e-12)
    gamma_ratio = sigma_l / sigma_r
    mean_abs = float(np.mean(np.abs(values)))
    mean_sq = float(np.mean(values * values))
    rho = mean_abs * mean_abs / mean_sq
    r_hat = rho * (gamma_ratio**3 + 1.0) * (gamma_ratio + 1.0) / (gamma_ratio**2 + 1.0) ** 2
    shape = _lookup_shape(r_hat)
    mean = (sigma_r - sigma_l) * (
        special.gamma(2.0 / shape)
        / math.sqrt(special.gamma(1.0 / shape) * special.gamma(3.0 / shape))
    )
    return shape, float(mean), sigma_l**2, sigma_r**2


def _orientation_products(coeff: np.ndarray) -> List[np.ndarray]:
    return [
        coeff[:-1, :] * coeff[1:, :],           # vertical neighbor
        coeff[:, :-1] * coeff[:, 1:],           # horizontal neighbor
        coeff[:-1, :-1] * coeff[1:, 1:],        # main diagonal
        coeff[1:, :-1] * coeff[:-1, 1:],        # anti diagonal
    ]


def _features18(coeff: np.ndarray) -> np.ndarray:
    feats = list(fit_ggd(coeff.ravel()))
    for prod in _orientation_products(coeff):
        feats.extend(fit_aggd(prod.ravel()))
    return np.asarray(feats, dtype=np.float64)


def brisque_features(image: ImageGrid, c: float = 1.0) -> np.ndarray:
    """The 18 single-scale BRISQUE features of one image.

    Quality scoring from these features is a separate regression step and is
    not bundled here; feature extraction is the supported contract.
    """
    if image.data.max() == image.data.min():
        raise DegenerateInputError("MSCN features are undefined for a constant image")
    coeff, _ = mscn(image.data, c=c)
    return _features18(coeff)


@dataclass(frozen=True)
class NiqeModel:
    """Multivariate Gaussian of 36 pristine-corpus features."""

    mean: np.ndarray
    covariance: np.ndarray
    patch_size: int
    corpus_size: int
    created: Optional[str] = None

    def __post_init__(self):
        if self.mean.shape != (36,) or self.covariance.shape != (36, 36):
            raise MetricsError("NIQE model needs a 36-vector mean and 36x36 covariance")

    def to_json(self) -> str:
        return json.dumps(
            {
                "format": "niqe-model-v1",
                "patch_size": self.patch_size,
                "corpus_size": self.corpus_size,
                "created": self.created,
                "mean_b64": base64.b64encode(
                    np.ascontiguousarray(self.mean, dtype="<f8").tobytes()
                ).decode("ascii"),
                "cov_b64": base64.b64encode(
                    np.ascontiguousarray(self.covariance, dtype="<f8").tobytes()
                ).decode("ascii"),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "NiqeModel":
        try:
            raw = json.loads(text)
            mean = np.frombuffer(base64.b64decode(raw["mean_b64"]), dtype="<f8").copy()
            cov = np.frombuffer(base64.b64decode(raw["cov_b64"]), dtype="<f8").copy()
            return cls(
                mean=mean,
                covariance=cov.reshape(36, 36),
                patch_size=int(raw["patch_size"]),
                corpus_size=int(raw["corpus_size"]),
                created=raw.get("created"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MetricsError(f"malformed NIQE model document: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="ascii")

    @classmethod
    def load(cls, path) -> "NiqeModel":
        return cls.from_json(Path(path).read_text(encoding="ascii"))


def _patch_grid(height: int, width: int, patch: int, stride: int):
    ys = range(0, height - patch + 1, stride)
    xs = range(0, width - patch + 1, stride)
    return [(y, x) for y in ys for x in xs]


def _patch_features(image: ImageGrid, patch: int, c: float = 1.0):
    """Per-patch 36-dim features at two scales, plus per-patch sharpness."""
    coeff1, sigma1 = mscn(image.data, c=c)
    small = downsample2(image.data)
    coeff2, _ = mscn(small, c=c)
    stride = patch // 2
    positions = _patch_grid(*image.shape, patch, stride)
    if not positions:
        raise MetricsError(
            f"image {image.height}x{image.width} is smaller than the {patch}-pixel patch"
        )
    feats = []
    sharpness = []
    half = patch // 2
    for y, x in positions:
        f1 = _features18(coeff1[y : y + patch, x : x + patch])
        y2, x2 = y // 2, x // 2
        f2 = _features18(coeff2[y2 : y2 + half, x2 : x2 + half])
        feats.append(np.concatenate([f1, f2]))
        sharpness.append(float(np.mean(sigma1[y : y + patch, x : x + patch])))
    return np.asarray(feats), np.asarray(sharpness)


def niqe_fit(
    corpus: Iterable[ImageGrid],
    patch: int = NIQE_PATCH,
    c: float = 1.0,
    sharpness_percentile: float = SHARPNESS_PERCENTILE,
) -> NiqeModel:
    """Fit the pristine-corpus Gaussian from sharp patches.

    Per image, patches whose local-std mean reaches that image's
    ``sharpness_percentile`` are kept (the original method also restricts the
    fit to sharp patches). Needs at least 20 images, each large enough for
    one patch.
    """
    images: Sequence[ImageGrid] = list(corpus)
    if len(images) < 20:
        raise MetricsError(f"niqe_fit needs at least 20 images, got {len(images)}")
    selected = []
    for img in images:
        feats, sharp = _patch_features(img, patch, c=c)
        threshold = np.percentile(sharp, sharpness_percentile)
        keep = sharp >= threshold
        selected.append(feats[keep])
    stack = np.vstack(selected)
    mean = stack.mean(axis=0)
    cov = np.cov(stack, rowvar=False)
    return NiqeModel(mean=mean, covariance=cov, patch_size=patch, corpus_size=len(images))


def niqe_score(image: ImageGrid, model: NiqeModel, c: float = 1.0) -> float:
    """NIQE distance of one image to the pristine model (lower is better).

    All patches of the image contribute; the image-side covariance is
    averaged with the model covariance, with a pseudo-inverse fallback when
    that average is singular.
    """
    feats, _ = _patch_features(image, model.patch_size, c=c)
    nu_i = feats.mean(axis=0)
    sigma_i = np.cov(feats, rowvar=False) if feats.shape[0] > 1 else np.zeros((36, 36))
    pooled = 0.5 * (model.covariance + sigma_i)
    delta = model.mean - nu_i
    try:
        solved = np.linalg.solve(pooled, delta)
    except np.linalg.LinAlgError:
        solved = np.linalg.pinv(pooled) @ delta
    return math.sqrt(max(float(delta @ solved), 0.0))
