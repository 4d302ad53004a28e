"""Shared on-disk formats: (index, real, imag) CSV vectors and raw
interleaved float64 little-endian I/Q files."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = ["write_vector_csv", "read_vector_csv", "write_iq", "read_iq"]


def write_vector_csv(path, vec) -> None:
    vec = np.asarray(vec, dtype=np.complex128)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "real", "imag"])
        for i, z in enumerate(vec):
            w.writerow([i, repr(float(z.real)), repr(float(z.imag))])


def read_vector_csv(path) -> np.ndarray:
    rows = []
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or [c.strip() for c in header[:3]] != ["index", "real", "imag"]:
            raise ValueError(f"unexpected CSV header in {path}: {header}")
        for row in r:
            rows.append(complex(float(row[1]), float(row[2])))
    if not rows:
        raise ValueError(f"no samples in {path}")
    return np.asarray(rows, dtype=np.complex128)


def write_iq(path, vec) -> None:
    """Interleaved I/Q, one float64 little-endian pair per complex sample."""
    vec = np.asarray(vec, dtype=np.complex128)
    inter = np.empty(2 * vec.size, dtype="<f8")
    inter[0::2] = vec.real
    inter[1::2] = vec.imag
    inter.tofile(Path(path))


def read_iq(path) -> np.ndarray:
    inter = np.fromfile(Path(path), dtype="<f8")
    if inter.size % 2:
        raise ValueError(f"{path} does not hold an even number of float64 values")
    return inter[0::2] + 1j * inter[1::2]
