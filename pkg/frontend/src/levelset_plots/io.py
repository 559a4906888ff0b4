"""Readers for the benchmark CSV artifacts (schema_version = 1)."""

from __future__ import annotations

import csv
import json


class PlotDataError(Exception):
    """An input file does not match the expected schema."""


SUMMARY_COLUMNS = [
    "schema_version",
    "algorithm",
    "instance",
    "checkpoint_samples",
    "f1_mean",
    "f1_stderr",
    "n_seeds",
]


def read_summary_csv(path) -> list[dict]:
    """Aggregated F1 rows: one per (algorithm, instance, checkpoint)."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != SUMMARY_COLUMNS:
            missing = [c for c in SUMMARY_COLUMNS if not header or c not in header]
            raise PlotDataError(f"summary csv {path}: missing columns {missing}")
        rows = []
        for record in reader:
            row = dict(zip(header, record))
            if row["schema_version"] != "1":
                raise PlotDataError(f"summary csv {path}: unsupported schema_version")
            row["checkpoint_samples"] = int(row["checkpoint_samples"])
            row["f1_mean"] = float(row["f1_mean"])
            row["f1_stderr"] = float(row["f1_stderr"])
            row["n_seeds"] = int(row["n_seeds"])
            rows.append(row)
    if not rows:
        raise PlotDataError(f"summary csv {path}: no rows")
    return rows


def read_allocation_csv(path) -> tuple[list[dict], int]:
    """Allocation rows plus the coordinate dimension.

    Columns are arm_index, x0..x{d-1}, weight, round; round -1 tags the
    doubling-weighted total and -2 the oracle design.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if (
            not header
            or header[0] != "arm_index"
            or header[-2:] != ["weight", "round"]
            or not all(c == f"x{i}" for i, c in enumerate(header[1:-2]))
        ):
            raise PlotDataError(f"allocation csv {path}: unexpected header {header}")
        dim = len(header) - 3
        rows = []
        for record in reader:
            rows.append(
                {
                    "arm_index": int(record[0]),
                    "coords": [float(v) for v in record[1 : 1 + dim]],
                    "weight": float(record[1 + dim]),
                    "round": int(record[2 + dim]),
                }
            )
    if not rows:
        raise PlotDataError(f"allocation csv {path}: no rows")
    return rows, dim


def read_environment_json(path) -> dict:
    """A replayable instance document (points and true values)."""
    with open(path) as handle:
        doc = json.load(handle)
    if "points" not in doc or "true_f" not in doc:
        raise PlotDataError(f"environment json {path}: needs points and true_f")
    return doc
