"""Reading and writing gridded functional samples.

CSV layout (human-auditable):
    line 1: ``S,T,N``
    line 2: S spatial coordinates
    line 3: T temporal coordinates
    lines 4..3+N: S*T surface values, row-major (spatial index outer)

BIN layout (bit-exact round trips): magic ``FDS1``, then little-endian
uint64 S, T, N, then float64 spatial coordinates, temporal coordinates
and the N*S*T values in the same order as the CSV.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .covariance import FunctionalSample
from .errors import SampleFormatError
from .grids import AxisGrid, ProductGrid

__all__ = ["read_sample", "write_sample"]

_MAGIC = b"FDS1"


def _build_sample(spatial, temporal, values, n, source) -> FunctionalSample:
    try:
        grid = ProductGrid(AxisGrid.from_points(spatial), AxisGrid.from_points(temporal))
        return FunctionalSample(grid, values.reshape(n, *grid.shape))
    except Exception as exc:
        raise SampleFormatError(f"{source}: {exc}") from exc


def _read_csv(path: Path) -> FunctionalSample:
    with path.open() as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 4:
        raise SampleFormatError(f"{path}: need header plus at least one observation")
    try:
        s, t, n = (int(v) for v in lines[0].split(","))
    except ValueError as exc:
        raise SampleFormatError(f"{path}:1: malformed header {lines[0]!r}") from exc
    if len(lines) != 3 + n:
        raise SampleFormatError(
            f"{path}: expected {3 + n} lines for N={n}, found {len(lines)}"
        )

    def parse_row(line_no: int, expect: int) -> np.ndarray:
        try:
            row = np.array([float(v) for v in lines[line_no - 1].split(",")])
        except ValueError as exc:
            raise SampleFormatError(f"{path}:{line_no}: non-numeric value") from exc
        if row.size != expect:
            raise SampleFormatError(
                f"{path}:{line_no}: expected {expect} values, found {row.size}"
            )
        if not np.all(np.isfinite(row)):
            raise SampleFormatError(f"{path}:{line_no}: non-finite value")
        return row

    spatial = parse_row(2, s)
    temporal = parse_row(3, t)
    values = np.stack([parse_row(4 + i, s * t) for i in range(n)])
    return _build_sample(spatial, temporal, values, n, str(path))


def _read_bin(path: Path) -> FunctionalSample:
    raw = path.read_bytes()
    if raw[:4] != _MAGIC:
        raise SampleFormatError(f"{path}: bad magic bytes {raw[:4]!r}")
    try:
        s, t, n = struct.unpack_from("<3Q", raw, 4)
        floats = np.frombuffer(raw, dtype="<f8", offset=4 + 24)
    except struct.error as exc:
        raise SampleFormatError(f"{path}: truncated header") from exc
    expect = s + t + n * s * t
    if floats.size != expect:
        raise SampleFormatError(
            f"{path}: expected {expect} float64 payload values, found {floats.size}"
        )
    spatial = floats[:s]
    temporal = floats[s : s + t]
    values = floats[s + t :].copy()
    if not np.all(np.isfinite(values)):
        raise SampleFormatError(f"{path}: non-finite value in payload")
    return _build_sample(spatial, temporal, values, n, str(path))


def read_sample(path, fmt: str | None = None) -> FunctionalSample:
    """Load a sample, inferring csv/bin from the suffix unless given."""
    path = Path(path)
    fmt = fmt or ("bin" if path.suffix == ".bin" else "csv")
    if fmt == "csv":
        return _read_csv(path)
    if fmt == "bin":
        return _read_bin(path)
    raise SampleFormatError(f"unknown sample format {fmt!r}")


def write_sample(sample: FunctionalSample, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = fmt or ("bin" if path.suffix == ".bin" else "csv")
    s, t = sample.grid.shape
    n = sample.n_obs
    spatial = sample.grid.spatial.points
    temporal = sample.grid.temporal.points
    flat = sample.observations.reshape(n, s * t)
    if fmt == "csv":
        with path.open("w") as fh:
            fh.write(f"{s},{t},{n}\n")
            fh.write(",".join(f"{v:.17g}" for v in spatial) + "\n")
            fh.write(",".join(f"{v:.17g}" for v in temporal) + "\n")
            for row in flat:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    elif fmt == "bin":
        with path.open("wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<3Q", s, t, n))
            fh.write(spatial.astype("<f8").tobytes())
            fh.write(temporal.astype("<f8").tobytes())
            fh.write(flat.astype("<f8").tobytes())
    else:
        raise SampleFormatError(f"unknown sample format {fmt!r}")
