"""Matrix file formats shared by the CLI and the experiment scripts.

CSV: a `# rows cols` header line, then comma-separated rows at 17 significant
digits so values round-trip exactly. Binary: magic `DMAP1`, little-endian
u64 rows, u64 cols, then row-major float64 data.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .exceptions import InputError

MAGIC = b"DMAP1"
FORMATS = ("csv", "bin")


def _as_matrix(values: np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError("only 1-d or 2-d arrays can be serialized")
    return arr


def write_matrix_csv(path: str | Path, values: np.ndarray) -> None:
    arr = _as_matrix(values)
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"# {arr.shape[0]} {arr.shape[1]}\n")
        for row in arr:
            handle.write(",".join(format(v, ".17g") for v in row))
            handle.write("\n")


def read_matrix_csv(path: str | Path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as handle:
        header = handle.readline()
        if not header.startswith("#"):
            raise InputError(f"{path}: missing '# rows cols' header")
        try:
            rows, cols = (int(tok) for tok in header[1:].split())
        except ValueError as exc:
            raise InputError(f"{path}: malformed header {header!r}") from exc
        data = np.loadtxt(handle, delimiter=",", ndmin=2)
    if data.shape != (rows, cols):
        raise InputError(
            f"{path}: header promises {rows}x{cols} but file holds {data.shape}"
        )
    return data


def write_matrix_bin(path: str | Path, values: np.ndarray) -> None:
    arr = _as_matrix(values)
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<QQ", arr.shape[0], arr.shape[1]))
        handle.write(arr.astype("<f8").tobytes(order="C"))


def read_matrix_bin(path: str | Path) -> np.ndarray:
    with open(path, "rb") as handle:
        magic = handle.read(len(MAGIC))
        if magic != MAGIC:
            raise InputError(f"{path}: bad magic {magic!r}")
        rows, cols = struct.unpack("<QQ", handle.read(16))
        payload = handle.read(rows * cols * 8)
    if len(payload) != rows * cols * 8:
        raise InputError(f"{path}: truncated payload")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()


def write_matrix(path: str | Path, values: np.ndarray, fmt: str = "csv") -> None:
    if fmt == "csv":
        write_matrix_csv(path, values)
    elif fmt == "bin":
        write_matrix_bin(path, values)
    else:
        raise InputError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def read_matrix(path: str | Path) -> np.ndarray:
    """Read either format, sniffing the binary magic."""
    with open(path, "rb") as handle:
        magic = handle.read(len(MAGIC))
    if magic == MAGIC:
        return read_matrix_bin(path)
    return read_matrix_csv(path)
