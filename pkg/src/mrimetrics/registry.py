"""The single metric registry: names, orientations and evaluation dispatch.

Metric names are the lowercase table abbreviations used on the CLI and in
benchmark outputs. Orientation records whether a larger score claims higher
similarity/quality. BRISQUE appears for ordering/orientation metadata only;
without a trained regressor it exposes features, not a scalar score.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional

from . import nrmetrics, refmetrics
from .errors import ConfigError
from .grid import DataRangeMode, ImageGrid
from .nss import NiqeModel, niqe_score

__all__ = [
    "MetricInfo",
    "METRICS",
    "metric_names",
    "reference_metric_names",
    "non_reference_metric_names",
    "evaluate_metric",
]

REFERENCE = "reference"
NON_REFERENCE = "non-reference"
DOWNSTREAM = "downstream"


@dataclass(frozen=True)
class MetricInfo:
    name: str
    kind: str
    higher_is_better: bool
    scalar: bool = True
    uses_data_range: bool = False


# table order: similarity metrics, then quality metrics
METRICS: Dict[str, MetricInfo] = {
    m.name: m
    for m in [
        MetricInfo("ssim", REFERENCE, True, uses_data_range=True),
        MetricInfo("ms-ssim", REFERENCE, True, uses_data_range=True),
        MetricInfo("cw-ssim", REFERENCE, True),
        MetricInfo("psnr", REFERENCE, True, uses_data_range=True),
        MetricInfo("nmse", REFERENCE, False),
        MetricInfo("mse", REFERENCE, False),
        MetricInfo("mae", REFERENCE, False),
        MetricInfo("rmse", REFERENCE, False),
        MetricInfo("nmi", REFERENCE, True),
        MetricInfo("mi", REFERENCE, True),
        MetricInfo("pcc", REFERENCE, True),
        MetricInfo("dsc", DOWNSTREAM, True),
        MetricInfo("be", NON_REFERENCE, False),
        MetricInfo("br", NON_REFERENCE, False, uses_data_range=True),
        MetricInfo("mb", NON_REFERENCE, True, uses_data_range=True),
        MetricInfo("vl", NON_REFERENCE, False),
        MetricInfo("bew", NON_REFERENCE, False, uses_data_range=True),
        MetricInfo("jnb", NON_REFERENCE, False, uses_data_range=True),
        MetricInfo("cpbd", NON_REFERENCE, True, uses_data_range=True),
        MetricInfo("mlc", NON_REFERENCE, False),
        MetricInfo("mslc", NON_REFERENCE, False),
        MetricInfo("brisque", NON_REFERENCE, False, scalar=False),
        MetricInfo("niqe", NON_REFERENCE, False),
        MetricInfo("mtv", NON_REFERENCE, False),
    ]
}


def metric_names():
    return list(METRICS)


def reference_metric_names():
    return [n for n, m in METRICS.items() if m.kind == REFERENCE]


def non_reference_metric_names(scalar_only: bool = True):
    return [
        n
        for n, m in METRICS.items()
        if m.kind == NON_REFERENCE and (m.scalar or not scalar_only)
    ]


def evaluate_metric(
    name: str,
    image: ImageGrid,
    reference: Optional[ImageGrid] = None,
    data_range=None,
    niqe_model: Optional[NiqeModel] = None,
) -> float:
    """Evaluate one scalar metric by registry name.

    Reference metrics need ``reference``; non-reference metrics score
    ``image`` alone. ``data_range`` follows the refmetrics conventions
    (number, DataRangeMode or None for the default).
    """
    info = METRICS.get(name)
    if info is None:
        raise ConfigError(f"unknown metric {name!r}")
    if not info.scalar:
        raise ConfigError(f"metric {name!r} has no scalar score without a trained regressor")
    if info.kind == REFERENCE:
        if reference is None:
            raise ConfigError(f"metric {name!r} needs a reference image")
        return _EVAL_REFERENCE[name](image, reference, data_range)
    if info.kind == DOWNSTREAM:
        raise ConfigError("dsc operates on label masks; call refmetrics.dsc directly")
    return _EVAL_NON_REFERENCE[name](image, data_range, niqe_model)


def _scalar_range(image: ImageGrid, data_range) -> Optional[float]:
    """Non-reference metrics accept only a concrete L; resolve modes here."""
    if data_range is None:
        return None
    if isinstance(data_range, DataRangeMode):
        if data_range.kind == "fixed":
            return float(data_range.value)
        from .grid import resolve_data_range

        return resolve_data_range(DataRangeMode.per_image(), [image])
    return float(data_range)


_EVAL_REFERENCE: Dict[str, Callable] = {
    "ssim": lambda i, r, dr: refmetrics.ssim(i, r, data_range=dr),
    "ms-ssim": lambda i, r, dr: refmetrics.ms_ssim(i, r, data_range=dr),
    "cw-ssim": lambda i, r, dr: refmetrics.cw_ssim(i, r),
    "psnr": lambda i, r, dr: refmetrics.psnr(i, r, data_range=dr),
    "nmse": lambda i, r, dr: refmetrics.error_metrics(i, r)["nmse"],
    "mse": lambda i, r, dr: refmetrics.error_metrics(i, r)["mse"],
    "mae": lambda i, r, dr: refmetrics.error_metrics(i, r)["mae"],
    "rmse": lambda i, r, dr: refmetrics.error_metrics(i, r)["rmse"],
    "nmi": lambda i, r, dr: refmetrics.nmi(i, r),
    "mi": lambda i, r, dr: refmetrics.mi(i, r),
    "pcc": lambda i, r, dr: refmetrics.pcc(i, r),
}


def _eval_niqe(image, data_range, model):
    if model is None:
        raise ConfigError("niqe needs a fitted NiqeModel (see niqe-fit)")
    return niqe_score(image, model)


_EVAL_NON_REFERENCE: Dict[str, Callable] = {
    "be": lambda i, dr, m: nrmetrics.blur_effect(i),
    "br": lambda i, dr, m: nrmetrics.blur_ratio_mean_blur(i, data_range=_scalar_range(i, dr))["br"],
    "mb": lambda i, dr, m: nrmetrics.blur_ratio_mean_blur(i, data_range=_scalar_range(i, dr))["mb"],
    "vl": lambda i, dr, m: nrmetrics.variance_of_laplacian(i),
    "bew": lambda i, dr, m: nrmetrics.blurred_edge_widths(i, data_range=_scalar_range(i, dr)),
    "jnb": lambda i, dr, m: nrmetrics.jnb(i, data_range=_scalar_range(i, dr)),
    "cpbd": lambda i, dr, m: nrmetrics.cpbd(i, data_range=_scalar_range(i, dr)),
    "mlc": lambda i, dr, m: nrmetrics.mlc(i),
    "mslc": lambda i, dr, m: nrmetrics.mslc(i),
    "niqe": _eval_niqe,
    "mtv": lambda i, dr, m: nrmetrics.mtv(i),
}
