"""CSV reading and writing.

Hourly series use the long format ``hour,<key>,value``. Floats are written
with ``repr`` so every file reads back bit-identical. Files ending in
``.gz`` are transparently (de)compressed.
"""

from __future__ import annotations

import csv
import gzip
import io
import math
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, FormatError


@contextmanager
def _gzip_writer(path: Path):
    # empty name and mtime=0 keep compressed output byte-stable
    with open(path, "wb") as raw, gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as gz:
        with io.TextIOWrapper(gz, newline="", encoding="utf-8") as fh:
            yield fh


def _open_text(path: Path, mode: str):
    if path.suffix == ".gz":
        if "w" in mode:
            return _gzip_writer(path)
        return gzip.open(path, "rt", newline="", encoding="utf-8")
    return open(path, mode, newline="", encoding="utf-8")


def format_value(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    if hasattr(value, "value"):  # enums
        return str(value.value)
    return str(value)


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"{where}: non-numeric value {text!r}") from None
    if not math.isfinite(value):
        raise FormatError(f"{where}: non-finite value {text!r}")
    return value


def ingest_timeseries(path, hours: int | None = None) -> dict[str, np.ndarray]:
    """Read an ``hour,key,value`` file into one dense series per key.

    Every key must cover hours 0..H-1 exactly once; ``H`` is taken from
    ``hours`` or else from the largest hour in the file. Gaps, duplicates
    and non-finite values raise FormatError.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with _open_text(path, "r") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != 3 or header[0] != "hour" or header[2] != "value":
            raise FormatError(f"{path}: expected header 'hour,<key>,value', got {header}")
        rows = [row for row in reader if row]
    if not rows:
        raise FormatError(f"{path}: no data rows")
    for i, row in enumerate(rows):
        if len(row) != 3:
            raise FormatError(f"{path}:{i + 2}: expected 3 fields, got {len(row)}")
    hour_text, keys, value_text = zip(*rows)

    # bulk conversion; on failure locate the first offending row
    try:
        hour_arr = np.array(hour_text, dtype=np.int64)
    except ValueError:
        i = next(i for i, h in enumerate(hour_text) if not h.strip().lstrip("+-").isdigit())
        raise FormatError(f"{path}:{i + 2}: bad hour {hour_text[i]!r}") from None
    try:
        values = np.array(value_text, dtype=float)
    except ValueError:
        for i, text in enumerate(value_text):
            _parse_float(text, f"{path}:{i + 2}")
        raise
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(bad.argmax())
        raise FormatError(f"{path}:{i + 2}: non-finite value {value_text[i]!r}")
    out_of_grid = (hour_arr < 0) if hours is None else (hour_arr < 0) | (hour_arr >= hours)
    if out_of_grid.any():
        i = int(out_of_grid.argmax())
        raise FormatError(f"{path}:{i + 2}: hour {hour_arr[i]} outside the time grid")
    if hours is None:
        hours = int(hour_arr.max()) + 1

    index: dict[str, int] = {}
    key_idx = np.fromiter((index.setdefault(k, len(index)) for k in keys), dtype=np.int64, count=len(keys))
    key_names = list(index)  # first-seen order
    flat = key_idx * hours + hour_arr
    counts = np.bincount(flat, minlength=len(key_names) * hours)
    if (counts > 1).any():
        dup = int(np.flatnonzero(counts > 1)[0])
        i = int(np.flatnonzero(flat == dup)[1])
        raise FormatError(f"{path}:{i + 2}: duplicate entry for hour {hour_arr[i]}, {header[1]} {keys[i]}")
    out = {}
    for j, key in enumerate(key_names):
        have = counts[j * hours:(j + 1) * hours]
        if not have.all():
            raise FormatError(f"{path}: missing hour {int(np.argmin(have))} for {header[1]} {key}")
        arr = np.empty(hours)
        mask = key_idx == j
        arr[hour_arr[mask]] = values[mask]
        out[key] = arr
    return out


def write_timeseries(path, series: Mapping[str, np.ndarray], key_name: str = "key") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with _open_text(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["hour", key_name, "value"])
        keys = sorted(series)
        hours = len(next(iter(series.values()))) if series else 0
        for t in range(hours):
            for key in keys:
                writer.writerow([t, key, repr(float(series[key][t]))])
    return path


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with _open_text(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def read_table(path, required: Sequence[str] = ()) -> list[dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with _open_text(path, "r") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            raise FormatError(f"{path}: missing columns {missing}")
        return list(reader)


def table_float(row: Mapping[str, str], column: str, where: str = "") -> float | None:
    text = row[column]
    if text == "":
        return None
    return _parse_float(text, where or column)
