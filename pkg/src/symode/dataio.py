"""CSV reading/writing and series normalization.

Two file layouts are supported, both UTF-8 with LF endings and ``.``
decimals:

* trajectory files: header ``trajectory_id,step,<var1>,...,<vard>``, one
  row per (trajectory, step);
* observed series: header ``date,<var1>,...`` with ISO-8601 dates and one
  trajectory in date order. Dates are metadata only; the step index
  drives the time step.
"""

from __future__ import annotations

import csv
import datetime
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datasets import TrajectoryDataset
from .errors import (DataError, EmptyFileError, MissingColumnError,
                     NonNumericCellError)


def _read_rows(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise EmptyFileError(path)
    return rows


def _parse_cell(path, row_idx, column, text):
    try:
        return float(text)
    except ValueError:
        raise NonNumericCellError(path, row_idx, column, text) from None


def _check_expected(path, var_names, expected_columns):
    if expected_columns is None:
        return
    for col in expected_columns:
        if col not in var_names:
            raise MissingColumnError(path, col)


def load_csv(path, dt=1.0, expected_columns=None):
    """Load either file layout, dispatching on the first header column."""
    rows = _read_rows(path)
    first = rows[0][0].strip().lower()
    if first == "trajectory_id":
        return load_trajectories_csv(path, dt, expected_columns)
    if first == "date":
        return load_series_csv(path, dt, expected_columns)
    raise MissingColumnError(path, "trajectory_id or date")


def load_trajectories_csv(path, dt, expected_columns=None):
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "trajectory_id" or header[1] != "step":
        raise MissingColumnError(path, "trajectory_id,step,<vars>")
    var_names = tuple(header[2:])
    _check_expected(path, var_names, expected_columns)
    groups = {}
    for idx, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise DataError(f"{path}: row {idx}: expected {len(header)} cells, "
                            f"got {len(row)}")
        tid = row[0].strip()
        step = int(_parse_cell(path, idx, "step", row[1]))
        values = [_parse_cell(path, idx, var_names[j], row[2 + j])
                  for j in range(len(var_names))]
        groups.setdefault(tid, []).append((step, values))
    if not groups:
        raise EmptyFileError(path)
    trajectories = []
    for tid in groups:
        ordered = sorted(groups[tid], key=lambda sv: sv[0])
        arr = np.array([v for _, v in ordered], dtype=float)
        if arr.shape[0] < 2:
            raise DataError(f"{path}: trajectory {tid!r} has fewer than 2 rows")
        trajectories.append(arr)
    return TrajectoryDataset(trajectories, dt, var_names)


def load_series_csv(path, dt=1.0, expected_columns=None):
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "date":
        raise MissingColumnError(path, "date")
    var_names = tuple(header[1:])
    _check_expected(path, var_names, expected_columns)
    values = []
    for idx, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise DataError(f"{path}: row {idx}: expected {len(header)} cells, "
                            f"got {len(row)}")
        try:
            datetime.date.fromisoformat(row[0].strip())
        except ValueError:
            raise DataError(f"{path}: row {idx}: {row[0]!r} is not an "
                            f"ISO-8601 date") from None
        values.append([_parse_cell(path, idx, var_names[j], row[1 + j])
                       for j in range(len(var_names))])
    if not values:
        raise EmptyFileError(path)
    if len(values) < 2:
        raise DataError(f"{path}: need at least 2 data rows")
    return TrajectoryDataset([np.array(values, dtype=float)], dt, var_names)


def save_trajectories_csv(path, data):
    """Write a trajectory file; float cells use repr so a round trip
    reproduces the values exactly."""
    path = Path(path)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trajectory_id", "step", *data.var_names])
        for tid, traj in enumerate(data.trajectories):
            for step, row in enumerate(traj):
                writer.writerow([tid, step, *[repr(float(v)) for v in row]])
    return path


# ---------------------------------------------------------------------------
# normalization

NORMALIZATION_MODES = ("none", "by_constant", "by_max_total")


@dataclass(frozen=True)
class ScaleRecord:
    """Remembers how a series was scaled so forecasts can be reported back
    in the original units."""

    mode: str
    scale: float


def normalize_series(data, mode, constant=None):
    """Scale all values by a common positive factor.

    ``by_constant`` divides by the given constant; ``by_max_total`` divides
    by the largest row total observed, which maps the series into O(1).
    """
    if mode not in NORMALIZATION_MODES:
        raise ValueError(f"unknown normalization mode {mode!r}")
    if mode == "none":
        return data.with_split(data.split), ScaleRecord("none", 1.0)
    if mode == "by_constant":
        if constant is None:
            raise ValueError("by_constant normalization needs a constant")
        scale = float(constant)
    else:
        scale = max(float(t.sum(axis=1).max()) for t in data.trajectories)
    if not np.isfinite(scale) or scale <= 0:
        raise ValueError(f"normalization scale must be positive, got {scale}")
    scaled = [t / scale for t in data.trajectories]
    return (TrajectoryDataset(scaled, data.dt, data.var_names, data.split),
            ScaleRecord(mode, scale))


def denormalize_series(data, record):
    """Invert :func:`normalize_series`."""
    restored = [t * record.scale for t in data.trajectories]
    return TrajectoryDataset(restored, data.dt, data.var_names, data.split)
