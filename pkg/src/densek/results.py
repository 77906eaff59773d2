"""Versioned CSV/JSON result persistence and summary statistics.

CSV files are UTF-8, comma-separated, RFC-4180 quoted, with a header
row and a schema_version column on every row; readers reject unknown
versions.  Floats are written with 12 significant digits so reruns diff
byte-identically across platforms.  Line endings are '\n'.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import SchemaError

CSV_SCHEMA_VERSION = 1
_QUANTILES = (5, 25, 50, 75, 95)


def format_value(v) -> str:
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, float) or isinstance(v, np.floating):
        return format(float(v), ".12g")
    return str(v)


def write_csv(path, columns, rows) -> None:
    """rows: iterable of dicts keyed by `columns`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["schema_version", *columns])
        for row in rows:
            writer.writerow([CSV_SCHEMA_VERSION,
                             *(format_value(row[c]) for c in columns)])


def read_csv(path) -> tuple[list[str], list[dict]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration as e:
            raise SchemaError("results file has no header row") from e
        if not header or header[0] != "schema_version":
            raise SchemaError("results file lacks the schema_version column")
        columns = header[1:]
        rows = []
        for rec in reader:
            if not rec:
                continue
            if int(rec[0]) != CSV_SCHEMA_VERSION:
                raise SchemaError(f"unknown results schema version {rec[0]}")
            rows.append(dict(zip(columns, rec[1:])))
    return columns, rows


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def wilson_interval(successes: int, total: int,
                    z: float = 1.96) -> tuple[float, float]:
    """Wilson 95% (by default) score interval for a binomial frequency."""
    if total <= 0:
        return 0.0, 1.0
    ph = successes / total
    denom = 1.0 + z * z / total
    center = (ph + z * z / (2.0 * total)) / denom
    half = z * math.sqrt(ph * (1.0 - ph) / total
                         + z * z / (4.0 * total * total)) / denom
    return center - half, center + half


def _column_kind(values: list[str]) -> str:
    if values and all(v in ("true", "false") for v in values):
        return "bool"
    try:
        for v in values:
            float(v)
        return "number"
    except ValueError:
        return "text"


def summarize(path) -> dict:
    """Per-column statistics for a results CSV: mean/std/min/max and
    quantiles for numeric columns, counts plus a Wilson 95% interval for
    boolean columns."""
    columns, rows = read_csv(path)
    out = {"row_count": len(rows), "columns": {}}
    if not rows:
        return out
    for col in columns:
        values = [r[col] for r in rows]
        kind = _column_kind(values)
        if kind == "bool":
            succ = sum(v == "true" for v in values)
            lo, hi = wilson_interval(succ, len(values))
            out["columns"][col] = {
                "kind": "bool", "true_count": succ, "total": len(values),
                "frequency": succ / len(values),
                "wilson95_lower": lo, "wilson95_upper": hi,
            }
        elif kind == "number":
            arr = np.asarray([float(v) for v in values])
            finite = arr[np.isfinite(arr)]
            stats = {
                "kind": "number",
                "mean": float(finite.mean()) if finite.size else None,
                "std": float(finite.std(ddof=0)) if finite.size else None,
                "min": float(finite.min()) if finite.size else None,
                "max": float(finite.max()) if finite.size else None,
            }
            if finite.size:
                qs = np.percentile(finite, _QUANTILES)
                stats["quantiles"] = {str(q): float(v)
                                      for q, v in zip(_QUANTILES, qs)}
            out["columns"][col] = stats
        else:
            out["columns"][col] = {"kind": "text",
                                   "distinct": len(set(values))}
    return out
