"""Data matrices: container, CSV/BIN I/O and preprocessing."""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataIOError, NumericError, ParseError, ZeroRowError

BIN_MAGIC = b"DRED"
BIN_VERSION = 1
_BIN_HEADER = struct.Struct("<4sBQQ")


@dataclass(frozen=True)
class DataMatrix:
    """An ``n x D`` float64 matrix whose rows are data points.

    The array is stored read-only. ``history`` lists the preprocessing steps
    in the order they were applied.
    """

    values: np.ndarray
    row_normalized: bool = False
    column_centered: bool = False
    history: tuple = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if values.ndim != 2:
            raise ConfigError(f"data matrix must be 2-D, got shape {values.shape}")
        if values.shape[0] < 2 or values.shape[1] < 1:
            raise ConfigError(f"data matrix needs n >= 2 and D >= 1, got {values.shape}")
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise NumericError(f"non-finite value at row {i}, column {j}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.column_centered:
            means = np.abs(values.mean(axis=0))
            rms = np.sqrt(np.mean(values**2, axis=0))
            if np.any(means > 1e-12 * np.maximum(1.0, rms)):
                raise NumericError("matrix flagged column_centered has nonzero column means")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def D(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def flags(self) -> dict:
        return {
            "row_normalized": self.row_normalized,
            "column_centered": self.column_centered,
            "history": list(self.history),
        }

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)


def as_array(A) -> np.ndarray:
    """Return the float64 2-D array behind ``A`` (a DataMatrix or array-like)."""
    if isinstance(A, DataMatrix):
        return A.values
    arr = np.asarray(A, dtype=np.float64)
    if arr.ndim != 2:
        raise ConfigError(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


def preprocess(A, zero_rows: str = "abort") -> DataMatrix:
    """Scale rows to unit norm, then subtract column means.

    Centering comes last so the output is exactly column-centered; row norms
    may drift from 1 afterwards.

    Parameters
    ----------
    A : DataMatrix or array_like
    zero_rows : {"abort", "drop"}
        ``abort`` raises :class:`ZeroRowError` naming the first zero row;
        ``drop`` removes zero rows before normalizing.
    """
    if zero_rows not in ("abort", "drop"):
        raise ConfigError(f"unknown zero-row policy {zero_rows!r}")
    X = np.array(as_array(A), dtype=np.float64, copy=True)
    history = tuple(A.history) if isinstance(A, DataMatrix) else ()
    norms = np.linalg.norm(X, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        if zero_rows == "abort":
            raise ZeroRowError(int(zero[0]))
        keep = norms != 0.0
        X, norms = X[keep], norms[keep]
        history += (f"drop_zero_rows:{zero.size}",)
    if X.shape[0] < 2:
        raise ConfigError("preprocessing needs at least two nonzero rows")
    X /= norms[:, None]
    X -= X.mean(axis=0)
    return DataMatrix(
        X,
        row_normalized=True,
        column_centered=True,
        history=history + ("row_normalize", "column_center"),
    )


def _parse_csv_slow(path: Path, header: bool) -> np.ndarray:
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if header:
            next(reader, None)
        for r, line in enumerate(reader, start=1):
            if not line or all(not cell.strip() for cell in line):
                continue
            if width is None:
                width = len(line)
            elif len(line) != width:
                raise ParseError(
                    f"{path}: row {r} has {len(line)} columns, expected {width}", row=r, col=None
                )
            vals = []
            for c, cell in enumerate(line, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: cannot parse {cell.strip()!r} at row {r}, column {c}", row=r, col=c
                    ) from None
                if not np.isfinite(v):
                    raise ParseError(f"{path}: non-finite value at row {r}, column {c}", row=r, col=c)
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def read_csv(path, header: bool = False) -> np.ndarray:
    path = Path(path)
    try:
        X = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2, dtype=np.float64)
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not a text CSV file ({exc.reason})") from None
    except ValueError:
        # the slow path reports the offending cell
        X = _parse_csv_slow(path, header)
    if X.size == 0:
        raise ParseError(f"{path}: no data rows")
    if not np.all(np.isfinite(X)):
        i, j = np.argwhere(~np.isfinite(X))[0]
        raise ParseError(f"{path}: non-finite value at row {i + 1}, column {j + 1}", row=i + 1, col=j + 1)
    return X


def read_bin(path) -> np.ndarray:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    if len(raw) < _BIN_HEADER.size:
        raise ParseError(f"{path}: truncated header")
    magic, version, n, D = _BIN_HEADER.unpack_from(raw)
    if magic != BIN_MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r}")
    if version != BIN_VERSION:
        raise ParseError(f"{path}: unsupported format version {version}")
    payload = len(raw) - _BIN_HEADER.size
    if payload != 8 * n * D:
        raise ParseError(f"{path}: header declares {n}x{D} doubles but payload holds {payload} bytes")
    X = np.frombuffer(raw, dtype="<f8", count=n * D, offset=_BIN_HEADER.size)
    X = X.astype(np.float64).reshape(n, D)
    if not np.all(np.isfinite(X)):
        i, j = np.argwhere(~np.isfinite(X))[0]
        raise ParseError(f"{path}: non-finite value at row {i + 1}, column {j + 1}", row=i + 1, col=j + 1)
    return X


def load_matrix(path, format: str = "csv", header: bool = False) -> DataMatrix:
    """Load a CSV or BIN file. Preprocessing flags on the result are false."""
    fmt = format.lower()
    if fmt == "csv":
        X = read_csv(path, header=header)
    elif fmt == "bin":
        X = read_bin(path)
    else:
        raise ConfigError(f"unknown format {format!r}")
    return DataMatrix(X)


def write_bin(path, X) -> None:
    X = np.ascontiguousarray(as_array(X), dtype="<f8")
    n, D = X.shape
    try:
        with open(path, "wb") as fh:
            fh.write(_BIN_HEADER.pack(BIN_MAGIC, BIN_VERSION, n, D))
            fh.write(X.tobytes(order="C"))
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def write_csv(path, X) -> None:
    X = as_array(X)
    try:
        # repr round-trips doubles exactly
        with open(path, "w") as fh:
            for row in X:
                fh.write(",".join(repr(float(v)) for v in row))
                fh.write("\n")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def save_matrix(path, X, format: str = "bin") -> None:
    fmt = format.lower()
    if fmt == "bin":
        write_bin(path, X)
    elif fmt == "csv":
        write_csv(path, X)
    else:
        raise ConfigError(f"unknown format {format!r}")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_sidecar(path, record: dict) -> Path:
    side = sidecar_path(path)
    try:
        side.write_text(json.dumps(record, indent=2) + "\n")
    except OSError as exc:
        raise DataIOError(f"cannot write {side}: {exc}") from exc
    return side


def read_sidecar(path) -> dict | None:
    side = sidecar_path(path)
    if not side.exists():
        return None
    try:
        return json.loads(side.read_text())
    except (OSError, ValueError) as exc:
        raise DataIOError(f"cannot read {side}: {exc}") from exc
