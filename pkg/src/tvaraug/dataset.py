"""Ingestion and alignment of multivariate time series collections.

Input is long-format CSV, UTF-8, comma separated, `.` decimal point, header
row mandatory: `unit,time,<channel_1>,...,<channel_M>`. An optional RUL
column is treated as alignment metadata, never as a data channel. Units of
unequal length are truncated to the shortest: run-to-failure alignment keeps
the latest rows (right-aligned on end of life), time alignment keeps the
earliest.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (DegenerateLength, DuplicateTimestamp, EmptyUnit,
                     MissingColumn, NonNumericValue)

ALIGN_BY_TIME = "by_time"
ALIGN_BY_RUL = "by_rul"
_ALIGNMENTS = (ALIGN_BY_TIME, ALIGN_BY_RUL)


@dataclass(frozen=True)
class ColumnSchema:
    """Column mapping for long-format CSV ingestion.

    `channels=None` selects every column that is not the unit, time or RUL
    column, in file order.
    """
    unit: str = "unit"
    time: str = "time"
    rul: str = "rul"
    channels: Optional[Sequence[str]] = None


@dataclass(frozen=True)
class Dataset:
    units: tuple                 # J arrays, each (N, M) float64, read-only
    channel_names: tuple         # M distinct strings
    alignment: str
    time_origin: int
    unit_ids: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.units) < 1:
            raise ValueError("dataset needs at least one unit")
        if self.alignment not in _ALIGNMENTS:
            raise ValueError(f"unknown alignment {self.alignment!r}")
        shape = self.units[0].shape
        if shape[0] < 2:
            raise DegenerateLength(f"N={shape[0]} < 2 after alignment")
        if len(self.channel_names) != shape[1]:
            raise ValueError("channel_names length must equal M")
        if len(set(self.channel_names)) != len(self.channel_names):
            raise ValueError("channel names must be distinct")
        for u in self.units:
            if u.shape != shape:
                raise ValueError("all units must share the same shape")
            if not np.all(np.isfinite(u)):
                raise ValueError("units must be finite")
        if self.unit_ids and len(self.unit_ids) != len(self.units):
            raise ValueError("unit_ids length must equal unit count")

    @property
    def n_units(self):
        return len(self.units)

    @property
    def n_steps(self):
        return self.units[0].shape[0]

    @property
    def n_channels(self):
        return self.units[0].shape[1]


def dataset_from_arrays(arrays, channel_names, alignment=ALIGN_BY_TIME,
                        time_origin=0, unit_ids=()):
    units = []
    for a in arrays:
        a = np.array(a, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        a.flags.writeable = False
        units.append(a)
    if not unit_ids:
        unit_ids = tuple(f"u{i + 1}" for i in range(len(units)))
    return Dataset(units=tuple(units), channel_names=tuple(channel_names),
                   alignment=alignment, time_origin=int(time_origin),
                   unit_ids=tuple(unit_ids))


def _parse_float(text, col, unit, line_no):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise NonNumericValue(
            f"non-numeric value {text!r} in column {col!r}, unit {unit!r}, "
            f"line {line_no}") from None
    if not math.isfinite(value):
        raise NonNumericValue(
            f"non-finite value {text!r} in column {col!r}, unit {unit!r}, "
            f"line {line_no}")
    return value


def load_dataset(path, schema=None, alignment=ALIGN_BY_TIME):
    """Read a long-format CSV into an aligned Dataset."""
    schema = schema or ColumnSchema()
    if alignment not in _ALIGNMENTS:
        raise ValueError(f"unknown alignment {alignment!r}")

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn("empty file, header row is mandatory") \
                from None
        rows = list(reader)

    header = [h.strip() for h in header]
    for required in (schema.unit, schema.time):
        if required not in header:
            raise MissingColumn(f"required column {required!r} not in header")
    col_index = {name: i for i, name in enumerate(header)}

    if schema.channels is not None:
        channels = list(schema.channels)
        for c in channels:
            if c not in col_index:
                raise MissingColumn(f"channel column {c!r} not in header")
    else:
        reserved = {schema.unit, schema.time, schema.rul}
        channels = [h for h in header if h not in reserved]
    if not channels:
        raise MissingColumn("no channel columns found")

    rul_idx = col_index.get(schema.rul)
    unit_idx = col_index[schema.unit]
    time_idx = col_index[schema.time]
    chan_idx = [col_index[c] for c in channels]

    # group rows by unit, preserving first-appearance order
    per_unit = {}
    for i, row in enumerate(rows):
        line_no = i + 2     # header is line 1
        if len(row) != len(header):
            raise NonNumericValue(
                f"line {line_no} has {len(row)} fields, expected "
                f"{len(header)}")
        unit = row[unit_idx].strip()
        if not unit:
            raise EmptyUnit(f"blank unit identifier at line {line_no}")
        try:
            t = int(row[time_idx])
        except ValueError:
            raise NonNumericValue(
                f"non-integer time {row[time_idx]!r} in unit {unit!r}, "
                f"line {line_no}") from None
        values = [_parse_float(row[j], header[j], unit, line_no)
                  for j in chan_idx]
        rul = None
        if rul_idx is not None:
            rul = _parse_float(row[rul_idx], schema.rul, unit, line_no)
        per_unit.setdefault(unit, []).append((t, values, rul))

    if not per_unit:
        raise EmptyUnit("file contains a header but no data rows")

    unit_ids = []
    matrices = []
    first_times = []
    for unit, entries in per_unit.items():
        entries.sort(key=lambda e: e[0])
        times = [e[0] for e in entries]
        for a, b in zip(times, times[1:]):
            if a == b:
                raise DuplicateTimestamp(
                    f"unit {unit!r} has duplicate time {a}")
        if alignment == ALIGN_BY_RUL and rul_idx is not None:
            if entries[-1][2] != 0:
                raise ValueError(
                    f"unit {unit!r} does not end at failure: last RUL is "
                    f"{entries[-1][2]!r}, expected 0")
        unit_ids.append(unit)
        matrices.append(np.array([e[1] for e in entries], dtype=float))
        first_times.append(times[0])

    n_min = min(m.shape[0] for m in matrices)
    if n_min < 2:
        raise DegenerateLength(
            f"minimum common length {n_min} < 2 after alignment")

    if alignment == ALIGN_BY_RUL:
        matrices = [m[m.shape[0] - n_min:] for m in matrices]
        time_origin = -(n_min - 1)
    else:
        matrices = [m[:n_min] for m in matrices]
        time_origin = first_times[0]

    return dataset_from_arrays(matrices, channels, alignment=alignment,
                               time_origin=time_origin,
                               unit_ids=tuple(unit_ids))


def align_by_rul(raw_units, channel_names=None, unit_ids=()):
    """Right-align variable-length run-to-failure units on end of life.

    Every unit is assumed to end at failure (RUL 0 at its last row); the
    common index after truncation to the minimum length is therefore a
    shared RUL offset.
    """
    mats = []
    for u in raw_units:
        m = np.asarray(u, dtype=float)
        if m.ndim == 1:
            m = m[:, None]
        mats.append(m)
    n_min = min(m.shape[0] for m in mats)
    if n_min < 2:
        raise DegenerateLength(f"minimum common length {n_min} < 2")
    mats = [m[m.shape[0] - n_min:] for m in mats]
    if channel_names is None:
        channel_names = [f"ch{i + 1}" for i in range(mats[0].shape[1])]
    return dataset_from_arrays(mats, channel_names, alignment=ALIGN_BY_RUL,
                               time_origin=-(n_min - 1), unit_ids=unit_ids)


def write_dataset(ds, path):
    """Write a Dataset back to long-format CSV.

    Values are written with repr, which round-trips every float exactly;
    re-loading the file yields a bit-identical Dataset.
    """
    ids = ds.unit_ids or tuple(f"u{i + 1}" for i in range(ds.n_units))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["unit", "time", *ds.channel_names])
        for uid, unit in zip(ids, ds.units):
            for n in range(ds.n_steps):
                writer.writerow([uid, ds.time_origin + n,
                                 *[repr(float(v)) for v in unit[n]]])
