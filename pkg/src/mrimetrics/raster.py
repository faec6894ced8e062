"""Raster I/O: NPY (float64), binary PGM (P5, 8/16-bit) and headerless CSV grids.

NPY round-trips bit-exactly. PGM stores integers only, so float rasters must
be quantized (e.g. with Binning) before saving; the loader always returns
float64. CSV rows are comma separated with '.' decimals and no header.
"""

from __future__ import annotations

import io
import os
from pathlib import Path
from typing import Union

import numpy as np

from .errors import RasterFormatError
from .grid import ImageGrid

__all__ = ["load_raster", "save_raster"]

_EXTENSIONS = {".npy": "npy", ".pgm": "pgm", ".csv": "csv"}


def _resolve_format(path: Path, fmt: str) -> str:
    if fmt != "infer":
        if fmt not in ("npy", "pgm", "csv"):
            raise RasterFormatError(f"unknown raster format {fmt!r}")
        return fmt
    ext = path.suffix.lower()
    if ext not in _EXTENSIONS:
        raise RasterFormatError(f"cannot infer raster format from {path.name!r}")
    return _EXTENSIONS[ext]


def load_raster(path: Union[str, os.PathLike], fmt: str = "infer") -> ImageGrid:
    """Load a 2D raster as an :class:`ImageGrid`.

    Raises:
        RasterFormatError: on malformed headers, non-2D payloads or
            unsupported formats.
        FileNotFoundError: if the path does not exist.
    """
    path = Path(path)
    fmt = _resolve_format(path, fmt)
    if fmt == "npy":
        return _load_npy(path)
    if fmt == "pgm":
        return _load_pgm(path)
    return _load_csv(path)


def save_raster(image: ImageGrid, path: Union[str, os.PathLike], fmt: str = "infer") -> None:
    """Write an :class:`ImageGrid` to disk in the requested format."""
    path = Path(path)
    fmt = _resolve_format(path, fmt)
    if fmt == "npy":
        np.save(path, np.ascontiguousarray(image.data, dtype="<f8"))
    elif fmt == "pgm":
        _save_pgm(image, path)
    else:
        _save_csv(image, path)


def _load_npy(path: Path) -> ImageGrid:
    try:
        arr = np.load(path, allow_pickle=False)
    except FileNotFoundError:
        raise
    except (ValueError, OSError) as exc:
        raise RasterFormatError(f"malformed NPY file {path.name!r}: {exc}") from exc
    if arr.ndim != 2:
        raise RasterFormatError(f"expected 2D raster, got {arr.ndim}D in {path.name!r}")
    if not np.issubdtype(arr.dtype, np.number) or np.iscomplexobj(arr):
        raise RasterFormatError(f"unsupported NPY dtype {arr.dtype} in {path.name!r}")
    return ImageGrid(arr.astype(np.float64))


def _read_pgm_token(stream: io.BufferedReader) -> bytes:
    """Next whitespace-delimited header token, skipping '#' comments."""
    token = b""
    while True:
        ch = stream.read(1)
        if ch == b"":
            raise RasterFormatError("truncated PGM header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = stream.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def _load_pgm(path: Path) -> ImageGrid:
    with open(path, "rb") as stream:
        magic = stream.read(2)
        if magic != b"P5":
            raise RasterFormatError(f"not a binary PGM (P5) file: {path.name!r}")
        try:
            width = int(_read_pgm_token(stream))
            height = int(_read_pgm_token(stream))
            maxval = int(_read_pgm_token(stream))
        except ValueError as exc:
            raise RasterFormatError(f"malformed PGM header in {path.name!r}") from exc
        if width <= 0 or height <= 0 or not 0 < maxval < 65536:
            raise RasterFormatError(f"invalid PGM dimensions/maxval in {path.name!r}")
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        payload = stream.read(width * height * dtype.itemsize)
        if len(payload) != width * height * dtype.itemsize:
            raise RasterFormatError(f"PGM pixel payload truncated in {path.name!r}")
        arr = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    if arr.max(initial=0) > maxval:
        raise RasterFormatError(f"PGM pixel above declared maxval in {path.name!r}")
    return ImageGrid(arr.astype(np.float64))


def _save_pgm(image: ImageGrid, path: Path) -> None:
    data = image.data
    if np.any(data < 0) or np.any(data != np.round(data)):
        raise RasterFormatError("PGM requires non-negative integer intensities; bin the image first")
    top = int(data.max())
    if top > 65535:
        raise RasterFormatError("PGM cannot store intensities above 65535")
    maxval = 255 if top <= 255 else 65535
    dtype = np.dtype("u1") if maxval == 255 else np.dtype(">u2")
    with open(path, "wb") as stream:
        stream.write(f"P5\n{image.width} {image.height}\n{maxval}\n".encode("ascii"))
        stream.write(data.astype(dtype).tobytes())


def _load_csv(path: Path) -> ImageGrid:
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except (ValueError, OSError) as exc:
        raise RasterFormatError(f"malformed CSV grid {path.name!r}: {exc}") from exc
    if arr.size == 0:
        raise RasterFormatError(f"empty CSV grid {path.name!r}")
    return ImageGrid(arr)


def _save_csv(image: ImageGrid, path: Path) -> None:
    with open(path, "w", encoding="ascii") as stream:
        for row in image.data:
            stream.write(",".join(repr(float(v)) for v in row))
            stream.write("\n")
