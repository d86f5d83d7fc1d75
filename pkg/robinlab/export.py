"""
export.py – CSV and JSON artifact writers.

CSV floats are written with 17 significant digits.  JSON floats use Python's
shortest round-trip repr, which reproduces the same double; non-finite values
become null.
"""

from __future__ import annotations

import csv
import json
import math
import os
from typing import Any, Iterable, Sequence

import numpy as np

from robinlab.errors import ConfigError
from robinlab.geometry import Grid, ScalarField

__all__ = ["format_float", "jsonable", "write_csv", "write_json", "field_rows", "read_field_csv"]


def format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def _cell(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if value is None:
        return ""
    return value


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(path: str, payload: dict) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(jsonable(payload), fh, indent=2, allow_nan=False)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# Field files
# ---------------------------------------------------------------------------

def field_rows(field: ScalarField) -> tuple[list[str], list[list]]:
    """index, coords..., u"""
    grid = field.grid
    coords = ["s"] if grid.dim == 1 else ["x", "y"]
    rows = [
        [i, *grid.points[i].tolist(), float(field.values[i])] for i in range(grid.size)
    ]
    return ["index", *coords, "u"], rows


def read_field_csv(path: str, grid: Grid, atol: float = 1e-9) -> ScalarField:
    """Load a field CSV written by ``field_rows`` onto ``grid``; coordinates must match."""
    if not os.path.isfile(path):
        raise ConfigError(f"field file not found: {path}")
    coords = ["s"] if grid.dim == 1 else ["x", "y"]
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"u", *coords} - set(reader.fieldnames or ())
            if missing:
                raise ConfigError(f"field file {path} lacks columns {sorted(missing)}")
            table = [[float(row[c]) for c in coords] + [float(row["u"])] for row in reader]
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed field file {path}: {exc}") from exc

    data = np.array(table, dtype=float).reshape(-1, grid.dim + 1)
    if data.shape[0] != grid.size:
        raise ConfigError(
            f"field file {path} has {data.shape[0]} rows but the grid has {grid.size} points"
        )
    if not np.allclose(data[:, :-1], grid.points, atol=atol, rtol=0.0):
        raise ConfigError(f"field file {path} was written on a different grid")
    return ScalarField(grid, data[:, -1])
