"""Time-indexed diagnostic records and their CSV form.

Column order is fixed::

    t, l2, h1, h1_dot, hhalf_dot, gevrey_h1, dissipation, radius,
    omega_l2_<delta>, v_l2_<delta>   (one pair per splitting threshold)
    y_gevrey

Floats are written with 17 significant digits so a CSV re-read reproduces
the in-memory series bit for bit.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BASE_COLUMNS = ("t", "l2", "h1", "h1_dot", "hhalf_dot", "gevrey_h1", "dissipation", "radius")
TAIL_COLUMNS = ("y_gevrey",)


class SeriesFormatError(ValueError):
    """Malformed diagnostic CSV; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def format_delta(delta: float) -> str:
    return f"{float(delta):g}"


def columns_for(deltas) -> list[str]:
    cols = list(BASE_COLUMNS)
    for d in deltas:
        tag = format_delta(d)
        cols += [f"omega_l2_{tag}", f"v_l2_{tag}"]
    return cols + list(TAIL_COLUMNS)


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass
class DiagnosticSeries:
    deltas: tuple[float, ...]
    rows: list[dict] = field(default_factory=list)

    def __post_init__(self):
        self.deltas = tuple(float(d) for d in self.deltas)

    @property
    def columns(self) -> list[str]:
        return columns_for(self.deltas)

    def __len__(self):
        return len(self.rows)

    def append(self, row: dict):
        missing = set(self.columns) - set(row)
        if missing:
            raise KeyError(f"record is missing columns {sorted(missing)}")
        if self.rows and not row["t"] > self.rows[-1]["t"]:
            raise ValueError("time column must be strictly increasing")
        self.rows.append({c: float(row[c]) for c in self.columns})

    def __getitem__(self, key: str) -> np.ndarray:
        if key not in self.columns:
            raise KeyError(f"unknown column {key!r}; available: {self.columns}")
        return np.array([r[key] for r in self.rows], dtype=float)

    @property
    def t(self) -> np.ndarray:
        return self["t"]

    def omega_key(self, delta: float) -> str:
        return f"omega_l2_{format_delta(delta)}"

    def v_key(self, delta: float) -> str:
        return f"v_l2_{format_delta(delta)}"

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([format_float(r[c]) for c in self.columns])
        return buf.getvalue()

    def to_csv(self, path):
        Path(path).write_text(self.to_csv_text())

    @classmethod
    def from_csv(cls, path) -> DiagnosticSeries:
        return cls.from_csv_text(Path(path).read_text())

    @classmethod
    def from_csv_text(cls, text: str) -> DiagnosticSeries:
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise SeriesFormatError("empty file", line=1) from None
        deltas = _parse_header(header)
        series = cls(deltas)
        for lineno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != len(header):
                raise SeriesFormatError(
                    f"expected {len(header)} fields, found {len(fields)}", line=lineno)
            try:
                values = [float(x) for x in fields]
            except ValueError as exc:
                raise SeriesFormatError(str(exc), line=lineno) from None
            try:
                series.append(dict(zip(header, values)))
            except ValueError as exc:
                raise SeriesFormatError(str(exc), line=lineno) from None
        if not series.rows:
            raise SeriesFormatError("series has no data rows", line=2)
        return series


def _parse_header(header: list[str]) -> tuple[float, ...]:
    nbase, ntail = len(BASE_COLUMNS), len(TAIL_COLUMNS)
    if tuple(header[:nbase]) != BASE_COLUMNS or tuple(header[-ntail:]) != TAIL_COLUMNS:
        raise SeriesFormatError(f"unexpected header {header}", line=1)
    middle = header[nbase:len(header) - ntail]
    if len(middle) % 2:
        raise SeriesFormatError("splitting columns must come in omega/v pairs", line=1)
    deltas = []
    for omega, v in zip(middle[::2], middle[1::2]):
        if not omega.startswith("omega_l2_") or not v.startswith("v_l2_"):
            raise SeriesFormatError(f"unknown columns {omega!r}, {v!r}", line=1)
        tag = omega[len("omega_l2_"):]
        if v[len("v_l2_"):] != tag:
            raise SeriesFormatError(f"mismatched splitting pair {omega!r}, {v!r}", line=1)
        try:
            deltas.append(float(tag))
        except ValueError:
            raise SeriesFormatError(f"bad threshold in column {omega!r}", line=1) from None
    if columns_for(deltas) != list(header):
        raise SeriesFormatError(f"unexpected header {header}", line=1)
    return tuple(deltas)
