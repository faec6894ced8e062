"""Command-line surface.

Subcommands: phantom, normalize, metric, distort, bench, niqe-fit.
Exit codes: 0 success, 1 usage error, 2 data/file error, 3 numeric or
degenerate-input error. stdout carries only machine-readable payload;
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from . import bench as bench_mod
from . import distort as distort_mod
from . import registry
from .errors import (
    ConfigError,
    DegenerateInputError,
    DimensionMismatchError,
    MetricsError,
    RasterFormatError,
)
from .grid import DataRangeMode
from .normalize import NormalizationSpec, apply_normalization
from .nss import NiqeModel, niqe_fit
from .phantom import make_phantom
from .raster import load_raster, save_raster
from .refmetrics import MetricReport

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's default 2
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="mrimetrics", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="write a seeded synthetic phantom")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--width", type=int, default=240)
    p.add_argument("--height", type=int, default=240)

    p = sub.add_parser("normalize", help="normalize one raster")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--norm", required=True,
                   help="none|minmax|cminmax|zscore|quantile|binning|pl:<model.json>")
    p.add_argument("--target", type=float, nargs=2, default=(0.0, 1.0), metavar=("J1", "J2"))
    p.add_argument("--clip", type=float, nargs=2, default=(5.0, 95.0), metavar=("P", "Q"))
    p.add_argument("--bins", type=int, default=256)

    p = sub.add_parser("metric", help="print metric CSV rows to stdout")
    p.add_argument("--img", type=Path, required=True)
    p.add_argument("--ref", type=Path)
    p.add_argument("--metrics", required=True, help="comma-separated registry names")
    p.add_argument("--norm", default="none")
    p.add_argument("--data-range", default="pair",
                   help="per-image|pair|dataset|fixed:<value>")
    p.add_argument("--clip", type=float, nargs=2, default=(5.0, 95.0), metavar=("P", "Q"))
    p.add_argument("--bins", type=int, default=256)
    p.add_argument("--niqe-model", type=Path)

    p = sub.add_parser("distort", help="apply one distortion or a full sweep")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=distort_mod.KINDS)
    p.add_argument("--strength", type=float)
    p.add_argument("--out", type=Path)
    p.add_argument("--out-dir", type=Path)
    p.add_argument("--kinds", help="comma-separated kinds for the sweep")
    p.add_argument("--strengths", help="comma-separated strengths for the sweep")

    p = sub.add_parser("niqe-fit", help="fit a NIQE model from pristine images")
    p.add_argument("--inputs", type=Path, help="directory of .npy rasters")
    p.add_argument("--phantoms", type=int, help="use N built-in phantoms instead")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, nargs=2, default=(240, 240), metavar=("W", "H"))
    p.add_argument("--patch", type=int, default=96)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("bench", help="run the benchmark harness from a TOML config")
    p.add_argument("--config", type=Path, required=True)
    return parser


def _norm_spec(args) -> NormalizationSpec:
    try:
        return NormalizationSpec.parse(
            args.norm,
            target_range=tuple(getattr(args, "target", (0.0, 1.0))),
            clip_percentiles=tuple(args.clip) if hasattr(args, "clip") else (5.0, 95.0),
            bins=getattr(args, "bins", 256),
        )
    except MetricsError as exc:
        raise _UsageError(str(exc)) from exc


def _cmd_phantom(args) -> int:
    save_raster(make_phantom(args.seed, args.width, args.height), args.out)
    return 0


def _cmd_normalize(args) -> int:
    image = load_raster(args.input)
    save_raster(apply_normalization(image, _norm_spec(args)), args.out)
    return 0


def _cmd_metric(args) -> int:
    names = [n.strip() for n in args.metrics.split(",") if n.strip()]
    if not names:
        raise _UsageError("--metrics needs at least one name")
    for name in names:
        if name not in registry.METRICS or not registry.METRICS[name].scalar:
            raise _UsageError(f"unknown or non-scalar metric {name!r}")
    mode = DataRangeMode.parse(args.data_range)
    spec = _norm_spec(args)
    image = apply_normalization(load_raster(args.img), spec)
    reference = None
    if args.ref is not None:
        reference = apply_normalization(load_raster(args.ref), spec)
    niqe_model = NiqeModel.load(args.niqe_model) if args.niqe_model else None
    for name in names:
        info = registry.METRICS[name]
        if info.kind == registry.REFERENCE and reference is None:
            raise _UsageError(f"metric {name!r} needs --ref")
        if mode.kind == "pair" and reference is None:
            effective = DataRangeMode.per_image()
        else:
            effective = mode
        score = registry.evaluate_metric(
            name,
            image,
            reference=reference if info.kind == registry.REFERENCE else None,
            data_range=effective,
            niqe_model=niqe_model,
        )
        report = MetricReport(
            metric=name,
            score=score,
            higher_is_better=info.higher_is_better,
            data_range_mode=str(mode),
            normalization=spec.label(),
        )
        print(report.to_csv_row())
    return 0


def _cmd_distort(args) -> int:
    image = load_raster(args.input)
    if args.out is not None:
        if args.kind is None or args.strength is None:
            raise _UsageError("single-shot distort needs --kind and --strength")
        spec = distort_mod.DistortionSpec(args.kind, args.strength, args.seed)
        save_raster(distort_mod.apply(image, spec), args.out)
        return 0
    if args.out_dir is None:
        raise _UsageError("distort needs --out or --out-dir")
    kinds = (
        tuple(k.strip() for k in args.kinds.split(",") if k.strip())
        if args.kinds
        else distort_mod.KINDS
    )
    strengths = (
        tuple(float(s) for s in args.strengths.split(",") if s.strip())
        if args.strengths
        else (1.0, 2.0, 3.0, 4.0, 5.0)
    )
    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = ["input,kind,strength,seed,output-path"]
    for spec, distorted in distort_mod.sweep(image, kinds=kinds, strengths=strengths, seed=args.seed):
        out_path = out_dir / f"{args.input.stem}__{spec.kind}__s{spec.strength:g}.npy"
        save_raster(distorted, out_path)
        manifest.append(f"{args.input},{spec.kind},{spec.strength!r},{spec.seed},{out_path}")
    (out_dir / "manifest.csv").write_text("\n".join(manifest) + "\n", encoding="utf-8")
    return 0


def _cmd_niqe_fit(args) -> int:
    if args.phantoms:
        corpus = [
            make_phantom(distort_mod.derive_seed(args.seed, "phantom", i), *args.size)
            for i in range(args.phantoms)
        ]
    elif args.inputs:
        paths = sorted(args.inputs.glob("*.npy"))
        corpus = [load_raster(p) for p in paths]
    else:
        raise _UsageError("niqe-fit needs --inputs or --phantoms")
    model = niqe_fit(corpus, patch=args.patch)
    model.save(args.out)
    return 0


def _cmd_bench(args) -> int:
    config = bench_mod.BenchmarkConfig.from_toml(args.config)
    rows = bench_mod.run(config)
    bench_mod.write_outputs(config, rows)
    print(str(Path(config.output_dir) / "rows.csv"))
    return 0


_COMMANDS = {
    "phantom": _cmd_phantom,
    "normalize": _cmd_normalize,
    "metric": _cmd_metric,
    "distort": _cmd_distort,
    "niqe-fit": _cmd_niqe_fit,
    "bench": _cmd_bench,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 2
    except (RasterFormatError, DimensionMismatchError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DegenerateInputError, MetricsError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
