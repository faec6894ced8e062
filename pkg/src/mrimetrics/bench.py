"""Benchmark harness: normalization x distortion x strength x metric sweeps
over an image directory (or built-in phantoms), median aggregation and
relative-sensitivity tables.

For every (image, distortion, strength) the reference and the distorted image
are normalized independently, each with its own statistics, before metric
evaluation; this is the only supported mode because range interaction is
exactly what the sweep measures. Non-reference metrics additionally score the
normalized reference once per image ("reference" rows, strength 0). Per-tuple
metric failures are recorded as error rows and never abort the sweep.
"""

from __future__ import annotations

import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

try:
    import tomllib  # python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - environment dependent
    import tomli as tomllib

from . import distort, registry
from .errors import ConfigError, MetricsError
from .grid import DataRangeMode, ImageGrid
from .normalize import NormalizationSpec, apply_normalization
from .nss import NiqeModel
from .phantom import make_phantom
from .raster import load_raster
from .refmetrics import _resolve_range  # shared L conventions

__all__ = [
    "BenchmarkConfig",
    "ResultRow",
    "SensitivityTable",
    "run",
    "aggregate_median",
    "relative_scores",
    "emit_csv",
    "emit_markdown",
    "write_outputs",
]

REFERENCE_LABEL = "reference"


@dataclass(frozen=True)
class BenchmarkConfig:
    """Full sweep description; every field maps to a TOML key."""

    metrics: Tuple[str, ...]
    normalizations: Tuple[str, ...] = ("none",)
    distortions: Tuple[str, ...] = distort.KINDS
    strengths: Tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0)
    input_dir: Optional[Path] = None
    phantom_count: int = 0
    phantom_size: Tuple[int, int] = (240, 240)
    seed: int = 0
    data_range: DataRangeMode = DataRangeMode.pair()
    output_dir: Path = Path("bench-out")
    jobs: int = 1
    cminmax_p: float = 5.0
    bins: int = 256
    niqe_model: Optional[Path] = None
    pl_model: Optional[Path] = None

    def __post_init__(self):
        if not self.metrics:
            raise ConfigError("metric list must be non-empty")
        if not self.distortions:
            raise ConfigError("distortion list must be non-empty")
        unknown = [m for m in self.metrics if m not in registry.METRICS or not registry.METRICS[m].scalar]
        if unknown:
            raise ConfigError(f"metrics not evaluable in the harness: {unknown}")
        if any(k not in distort.KINDS for k in self.distortions):
            raise ConfigError(f"unknown distortion kind in {self.distortions}")
        if any(not 1.0 <= s <= 5.0 for s in self.strengths):
            raise ConfigError("strengths must lie within [1, 5]")
        if self.input_dir is None and self.phantom_count <= 0:
            raise ConfigError("configure either input_dir or phantom_count")
        if "niqe" in self.metrics and self.niqe_model is None:
            raise ConfigError("the niqe metric needs niqe_model = <path> in the config")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    @classmethod
    def from_toml(cls, path) -> "BenchmarkConfig":
        with open(path, "rb") as stream:
            raw = tomllib.load(stream)
        known = {
            "metrics": tuple,
            "normalizations": tuple,
            "distortions": tuple,
            "strengths": lambda v: tuple(float(x) for x in v),
            "input_dir": Path,
            "phantom_count": int,
            "phantom_size": lambda v: (int(v[0]), int(v[1])),
            "seed": int,
            "data_range": DataRangeMode.parse,
            "output_dir": Path,
            "jobs": int,
            "cminmax_p": float,
            "bins": int,
            "niqe_model": Path,
            "pl_model": Path,
        }
        kwargs = {}
        for key, value in raw.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = known[key](value)
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ResultRow:
    """One evaluated tuple; error rows carry a message instead of a score."""

    image_id: str
    distortion: str
    strength: float
    normalization: str
    metric: str
    score: Optional[float]
    error: Optional[str] = None


@dataclass
class SensitivityTable:
    distortions: List[str]
    metrics: List[str]
    normalizations: List[str]
    medians: Dict[Tuple[str, str, str], float]
    pooled: Dict[Tuple[str, str], List[float]] = field(default_factory=dict)
    relatives: Dict[Tuple[str, str, str], Optional[float]] = field(default_factory=dict)


def _norm_specs(config: BenchmarkConfig) -> Dict[str, NormalizationSpec]:
    specs = {}
    for name in config.normalizations:
        if name == "pl":
            if config.pl_model is None:
                raise ConfigError("pl normalization needs pl_model = <path> in the config")
            specs[name] = NormalizationSpec.parse(f"pl:{config.pl_model}")
        else:
            specs[name] = NormalizationSpec(
                method=name,
                clip_percentiles=(config.cminmax_p, 100.0 - config.cminmax_p),
                bins=config.bins,
            )
    return specs


def _load_images(config: BenchmarkConfig) -> List[Tuple[str, Optional[ImageGrid], Optional[str]]]:
    """(image_id, grid-or-None, error) triples; unreadable files lose only
    their own rows."""
    items: List[Tuple[str, Optional[ImageGrid], Optional[str]]] = []
    if config.input_dir is not None:
        paths = sorted(Path(config.input_dir).glob("*.npy"))
        if not paths:
            raise ConfigError(f"no .npy rasters found in {config.input_dir}")
        for p in paths:
            try:
                items.append((p.stem, load_raster(p), None))
            except MetricsError as exc:
                items.append((p.stem, None, str(exc)))
    else:
        for i in range(config.phantom_count):
            seed = distort.derive_seed(config.seed, "phantom", i)
            items.append((f"phantom-{i:03d}", make_phantom(seed, *config.phantom_size), None))
    return items


def _resolve_tuple_range(config, dataset_ranges, norm_name, dist_n, ref_n):
    mode = config.data_range
    if mode.kind == "dataset":
        lo, hi = dataset_ranges[norm_name]
        rng = hi - lo
        if rng <= 0:
            raise MetricsError("degenerate dataset range")
        return rng
    return _resolve_range(mode, dist_n, ref_n)


def _dataset_ranges(config, images, specs) -> Dict[str, Tuple[float, float]]:
    """Global extrema per normalization over normalized references and all
    their distorted versions (regenerated deterministically in the main pass)."""
    ranges = {name: (math.inf, -math.inf) for name in specs}
    for _, image, error in images:
        if error is not None or image is None:
            continue
        variants = [image]
        for kind in config.distortions:
            for idx, strength in enumerate(config.strengths):
                spec = distort.DistortionSpec(
                    kind, strength, distort.derive_seed(config.seed, kind, idx)
                )
                variants.append(distort.apply(image, spec))
        for name, nspec in specs.items():
            for var in variants:
                data = apply_normalization(var, nspec).data
                lo, hi = ranges[name]
                ranges[name] = (min(lo, float(data.min())), max(hi, float(data.max())))
    return ranges


def _image_rows(config, specs, dataset_ranges, niqe_model, image_id, image) -> List[ResultRow]:
    rows: List[ResultRow] = []
    nr_metrics = [m for m in config.metrics if registry.METRICS[m].kind == registry.NON_REFERENCE]
    ref_metrics = [m for m in config.metrics if registry.METRICS[m].kind == registry.REFERENCE]
    normalized_refs = {name: apply_normalization(image, spec) for name, spec in specs.items()}

    for name in config.normalizations:
        ref_n = normalized_refs[name]
        for metric in nr_metrics:
            rows.append(
                _evaluate_row(
                    config, dataset_ranges, image_id, REFERENCE_LABEL, 0.0, name, metric,
                    ref_n, None, niqe_model,
                )
            )
    for kind in config.distortions:
        for idx, strength in enumerate(config.strengths):
            spec = distort.DistortionSpec(
                kind, strength, distort.derive_seed(config.seed, kind, idx)
            )
            distorted = distort.apply(image, spec)
            for name in config.normalizations:
                dist_n = apply_normalization(distorted, specs[name])
                ref_n = normalized_refs[name]
                for metric in ref_metrics + nr_metrics:
                    rows.append(
                        _evaluate_row(
                            config, dataset_ranges, image_id, kind, strength, name, metric,
                            dist_n, ref_n, niqe_model,
                        )
                    )
    return rows


def _evaluate_row(
    config, dataset_ranges, image_id, kind, strength, norm_name, metric, image_n, ref_n, niqe_model
) -> ResultRow:
    info = registry.METRICS[metric]
    try:
        if info.uses_data_range:
            anchor = ref_n if ref_n is not None else image_n
            data_range = _resolve_tuple_range(config, dataset_ranges, norm_name, image_n, anchor)
        else:
            data_range = None
        score = registry.evaluate_metric(
            metric,
            image_n,
            reference=ref_n if info.kind == registry.REFERENCE else None,
            data_range=data_range,
            niqe_model=niqe_model,
        )
        return ResultRow(image_id, kind, strength, norm_name, metric, float(score))
    except MetricsError as exc:
        return ResultRow(image_id, kind, strength, norm_name, metric, None, str(exc))


def run(config: BenchmarkConfig) -> List[ResultRow]:
    """Execute the sweep; deterministic for a fixed config."""
    specs = _norm_specs(config)
    niqe_model = NiqeModel.load(config.niqe_model) if config.niqe_model else None
    images = _load_images(config)
    dataset_ranges = (
        _dataset_ranges(config, images, specs) if config.data_range.kind == "dataset" else None
    )

    def worker(item):
        image_id, image, error = item
        if error is not None or image is None:
            print(f"skipping unreadable image {image_id}: {error}", file=sys.stderr)
            return []
        return _image_rows(config, specs, dataset_ranges, niqe_model, image_id, image)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            per_image = list(pool.map(worker, images))
    else:
        per_image = [worker(item) for item in images]
    return [row for rows in per_image for row in rows]


def _median_with_inf(values: Sequence[float]) -> float:
    """Median where +inf sorts above every finite value; the even-count
    median of a {finite, inf} middle pair is the finite partner."""
    s = sorted(values)
    n = len(s)
    if n == 0:
        raise MetricsError("median of an empty sample")
    if n % 2 == 1:
        return s[n // 2]
    a, b = s[n // 2 - 1], s[n // 2]
    if math.isinf(b):
        return a if not math.isinf(a) else b
    return 0.5 * (a + b)


def aggregate_median(rows: Sequence[ResultRow]) -> SensitivityTable:
    """Median per (distortion, metric, normalization) over the pooled
    images-times-strengths sample; error rows are excluded."""
    scored = [r for r in rows if r.score is not None]
    if not scored:
        raise MetricsError("no scored rows to aggregate")
    cells: Dict[Tuple[str, str, str], List[float]] = {}
    pooled: Dict[Tuple[str, str], List[float]] = {}
    for r in scored:
        cells.setdefault((r.distortion, r.metric, r.normalization), []).append(r.score)
        if r.distortion != REFERENCE_LABEL:
            pooled.setdefault((r.metric, r.normalization), []).append(r.score)
    distortions = [REFERENCE_LABEL] if any(r.distortion == REFERENCE_LABEL for r in scored) else []
    distortions += [k for k in distort.KINDS if any(r.distortion == k for r in scored)]
    metrics = [m for m in registry.METRICS if any(r.metric == m for r in scored)]
    norms = sorted({r.normalization for r in scored})
    medians = {key: _median_with_inf(vals) for key, vals in cells.items()}
    return SensitivityTable(
        distortions=distortions,
        metrics=metrics,
        normalizations=norms,
        medians=medians,
        pooled=pooled,
    )


def relative_scores(table: SensitivityTable) -> SensitivityTable:
    """Fill each cell's median divided by the pooled all-distortion median.

    Cells with a zero pooled median (or an inf/inf ratio) stay undefined and
    are emitted blank.
    """
    rel: Dict[Tuple[str, str, str], Optional[float]] = {}
    for (d, m, n), median in table.medians.items():
        if d == REFERENCE_LABEL:
            rel[(d, m, n)] = None
            continue
        pool = table.pooled.get((m, n))
        denom = _median_with_inf(pool) if pool else 0.0
        if denom == 0.0 or (math.isinf(median) and math.isinf(denom)):
            rel[(d, m, n)] = None
        elif math.isinf(denom):
            rel[(d, m, n)] = 0.0
        else:
            rel[(d, m, n)] = median / denom
    table.relatives = rel
    return table


def _shading(table: SensitivityTable) -> Dict[Tuple[str, str, str], float]:
    """Relative sensitivity in [0, 1] per cell: distance from the cell
    closest to perfect for that metric, scaled by the largest distance."""
    shading: Dict[Tuple[str, str, str], float] = {}
    for n in table.normalizations:
        for m in table.metrics:
            keys = [
                (d, m, n)
                for d in table.distortions
                if d != REFERENCE_LABEL and (d, m, n) in table.medians
            ]
            values = [table.medians[k] for k in keys]
            finite = [v for v in values if math.isfinite(v)]
            if not finite:
                for k in keys:
                    shading[k] = 0.0
                continue
            best = max(finite) if registry.METRICS[m].higher_is_better else min(finite)
            devs = [abs(v - best) if math.isfinite(v) else math.inf for v in values]
            finite_devs = [d for d in devs if math.isfinite(d)]
            top = max(finite_devs) if finite_devs else 0.0
            for k, dev in zip(keys, devs):
                if math.isinf(dev):
                    shading[k] = 1.0
                else:
                    shading[k] = dev / top if top > 0.0 else 0.0
    return shading


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def emit_csv(table: SensitivityTable) -> str:
    """Long-format CSV: distortion,metric,normalization,median,relative."""
    out = io.StringIO()
    out.write("distortion,metric,normalization,median,relative\n")
    for d in table.distortions:
        for m in table.metrics:
            for n in table.normalizations:
                key = (d, m, n)
                if key not in table.medians:
                    continue
                rel = table.relatives.get(key)
                out.write(f"{d},{m},{n},{_fmt(table.medians[key])},{_fmt(rel)}\n")
    return out.getvalue()


def emit_markdown(table: SensitivityTable) -> str:
    """Markdown grids (one per normalization): distortions as rows, metrics
    as columns, each metric paired with its shading value."""
    shading = _shading(table)
    lines: List[str] = []
    for n in table.normalizations:
        lines.append(f"## normalization: {n}")
        lines.append("")
        header = ["distortion"]
        for m in table.metrics:
            header += [m, f"{m} shading"]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for d in table.distortions:
            row = [d]
            for m in table.metrics:
                key = (d, m, n)
                if key in table.medians:
                    row.append(_fmt(table.medians[key]))
                    row.append("" if d == REFERENCE_LABEL else f"{shading.get(key, 0.0):.3f}")
                else:
                    row += ["", ""]
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
    return "\n".join(lines) + "\n"


def write_outputs(config: BenchmarkConfig, rows: Sequence[ResultRow]) -> None:
    """Write rows.csv, medians.csv, relative.csv and table.md."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "rows.csv", "w", newline="", encoding="ascii") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["image", "distortion", "strength", "normalization", "metric", "score", "error"])
        for r in rows:
            writer.writerow(
                [
                    r.image_id,
                    r.distortion,
                    repr(float(r.strength)),
                    r.normalization,
                    r.metric,
                    _fmt(r.score),
                    r.error or "",
                ]
            )
    table = relative_scores(aggregate_median(rows))
    median_csv = emit_csv(table)
    (out / "medians.csv").write_text(
        "".join(
            line + "\n"
            for line in median_csv.splitlines()
        ),
        encoding="ascii",
    )
    relative_lines = ["distortion,metric,normalization,relative"]
    for d in table.distortions:
        for m in table.metrics:
            for n in table.normalizations:
                key = (d, m, n)
                if key in table.medians:
                    relative_lines.append(f"{d},{m},{n},{_fmt(table.relatives.get(key))}")
    (out / "relative.csv").write_text("\n".join(relative_lines) + "\n", encoding="ascii")
    (out / "table.md").write_text(emit_markdown(table), encoding="ascii")
