"""Dataset files: one input vector per row, header names the columns.

The on-disk form is plain CSV with a header row ``x0,x1,...``; the header
arity fixes the dimension, so a ragged or reordered file is rejected
before any model sees it. Components must already live in [0, 1].
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError


def _expected_header(dim: int) -> list[str]:
    return [f"x{i}" for i in range(dim)]


def load_dataset(path: str | Path) -> np.ndarray:
    """Read a dataset file into an (n, d) float64 array."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError:
        raise ConfigError(f"dataset file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"dataset file {path} is empty") from None
        header = [h.strip() for h in header]
        dim = len(header)
        if dim < 1 or header != _expected_header(dim):
            raise ConfigError(
                f"dataset file {path} must start with a header x0..x{{d-1}}, "
                f"got {header!r}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim:
                raise ConfigError(
                    f"{path}:{lineno}: expected {dim} columns, got {len(row)}"
                )
            try:
                values = [float(v) for v in row]
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: non-numeric value") from None
            for v in values:
                if not math.isfinite(v) or not 0.0 <= v <= 1.0:
                    raise ConfigError(
                        f"{path}:{lineno}: component {v!r} outside [0, 1]"
                    )
            rows.append(values)
    if not rows:
        raise ConfigError(f"dataset file {path} has a header but no points")
    return np.asarray(rows, dtype=np.float64)


def save_dataset(path: str | Path, points: np.ndarray) -> None:
    """Write an (n, d) array as a dataset file load_dataset accepts."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0 or points.shape[1] == 0:
        raise ConfigError(f"need a non-empty 2-d array, got shape {points.shape}")
    if not np.all(np.isfinite(points)) or points.min() < 0.0 or points.max() > 1.0:
        raise ConfigError("dataset components must lie in [0, 1]")
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_expected_header(points.shape[1]))
        for row in points:
            writer.writerow([repr(float(v)) for v in row])
