"""Deterministic result emission.

Fixed inputs must produce byte-identical files: keys are sorted, floats
are quantized to 12 significant digits before serialization, and nothing
time- or host-dependent is ever written.  JSON carries the full nested
result; CSV carries flat tables for spreadsheet use.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import List, Sequence, Tuple


def round_float(x: float) -> float:
    """Quantize to 12 significant digits; leaves nan/inf alone."""
    if not math.isfinite(x):
        return x
    return float(f"{x:.12g}")


def _quantize(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        # Strict JSON has no NaN/inf token; emit null, matching the empty
        # CSV cell for the same value.
        if not math.isfinite(obj):
            return None
        return round_float(obj)
    if isinstance(obj, dict):
        return {k: _quantize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_quantize(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    """Sorted-key, quantized-float JSON text (no trailing newline)."""
    return json.dumps(_quantize(obj), sort_keys=True, indent=2, allow_nan=False)


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_json(obj, path: Path) -> Path:
    return write_text(path, canonical_json(obj) + "\n")


def write_csv(header: Sequence[str], rows: Sequence[Sequence], path: Path) -> Path:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(
                f"row has {len(row)} cells for {len(header)} columns"
            )
        lines.append(",".join(format_cell(c) for c in row))
    return write_text(path, "\n".join(lines) + "\n")


def aggregate_rows(result_dict: dict) -> Tuple[List[str], List[list]]:
    """Flatten a result's aggregates into (header, rows) for CSV."""
    if "side_by_side" in result_dict:
        header = ["metric", "even", "odd"]
        rows = [
            [key, cols["even"], cols["odd"]]
            for key, cols in sorted(result_dict["side_by_side"].items())
        ]
        return header, rows
    if "aggregates" in result_dict:
        agg = result_dict["aggregates"]
        keys = sorted(agg)
        return list(keys), [[agg[k] for k in keys]]
    if "table" in result_dict and result_dict["table"]:
        # List of uniform dicts, one CSV row each.
        first = result_dict["table"][0]
        keys = list(first)
        return keys, [[row[k] for k in keys] for row in result_dict["table"]]
    keys = sorted(
        k for k, v in result_dict.items() if isinstance(v, (int, float, str, bool))
    )
    return list(keys), [[result_dict[k] for k in keys]]


def replica_rows(result_dict: dict) -> Tuple[List[str], List[list]]:
    """Per-replica table of a result dict, one row per replica."""
    table = result_dict["replicas"]
    header = [
        "replica",
        "attracted_edge",
        "onset_step",
        "branching_vertex",
        "final_balance",
        "parity_residual",
        "truncated",
    ]
    rows = [
        [table[col][i] for col in header]
        for i in range(len(table["replica"]))
    ]
    return header, rows


def emit(result_dict: dict, fmt: str, out_dir: Path, stem: str) -> List[Path]:
    """Write a result in the requested format(s); returns written paths.

    json: <stem>.json with the full nested result.
    csv:  <stem>.csv with flat aggregates, plus <stem>.replicas.csv when
          the result carries a per-replica table.
    """
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"format must be json, csv, or both, got {fmt!r}")
    out_dir = Path(out_dir)
    written = []
    if fmt in ("json", "both"):
        written.append(write_json(result_dict, out_dir / f"{stem}.json"))
    if fmt in ("csv", "both"):
        header, rows = aggregate_rows(result_dict)
        written.append(write_csv(header, rows, out_dir / f"{stem}.csv"))
        if "replicas" in result_dict:
            header, rows = replica_rows(result_dict)
            written.append(
                write_csv(header, rows, out_dir / f"{stem}.replicas.csv")
            )
    return written
