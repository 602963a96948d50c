"""Binary checkpoint files.

Layout, all little-endian::

    magic   8 bytes  b"GNSSNAP1"
    n       uint32   modes per axis
    L       float64  box length
    t       float64  simulation time
    count   uint64   number of records
    records count x 23 bytes:
        comp  uint8   velocity component 0..2
        i,j,k int16   signed mode indices in [-n/2, n/2)
        re,im float64 coefficient

Only nonzero coefficients are stored, ordered by component then FFT index.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .spectral import Grid, SpectralVector

MAGIC = b"GNSSNAP1"
HEADER = struct.Struct("<IddQ")
RECORD = np.dtype([("comp", "<u1"), ("i", "<i2"), ("j", "<i2"), ("k", "<i2"),
                   ("re", "<f8"), ("im", "<f8")])


class SnapshotError(ValueError):
    pass


def write_snapshot(path, t: float, u: SpectralVector):
    grid = u.grid
    comp, i, j, k = np.nonzero(u.coeffs)
    idx = grid.index_1d
    rec = np.empty(comp.size, dtype=RECORD)
    rec["comp"] = comp
    rec["i"], rec["j"], rec["k"] = idx[i], idx[j], idx[k]
    vals = u.coeffs[comp, i, j, k]
    rec["re"], rec["im"] = vals.real, vals.imag
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(HEADER.pack(grid.n, grid.box_length, float(t), rec.size))
        fh.write(rec.tobytes())


def read_snapshot(path) -> tuple[float, SpectralVector]:
    data = Path(path).read_bytes()
    if data[:len(MAGIC)] != MAGIC:
        raise SnapshotError(f"{path}: not a snapshot file")
    off = len(MAGIC)
    if len(data) < off + HEADER.size:
        raise SnapshotError(f"{path}: truncated header")
    n, box_length, t, count = HEADER.unpack_from(data, off)
    off += HEADER.size
    if len(data) != off + count * RECORD.itemsize:
        raise SnapshotError(f"{path}: expected {count} records")
    rec = np.frombuffer(data, dtype=RECORD, count=count, offset=off)
    try:
        grid = Grid(n, box_length)
    except ValueError as exc:
        raise SnapshotError(f"{path}: {exc}") from None
    h = n // 2
    bad_index = any(np.any(np.abs(rec[c]) > h) for c in ("i", "j", "k"))
    if np.any(rec["comp"] > 2) or bad_index:
        raise SnapshotError(f"{path}: record out of range for n={n}")
    coeffs = np.zeros((3,) + grid.shape, dtype=complex)
    coeffs[rec["comp"], rec["i"] % n, rec["j"] % n, rec["k"] % n] = rec["re"] + 1j * rec["im"]
    return t, SpectralVector(grid, coeffs)
