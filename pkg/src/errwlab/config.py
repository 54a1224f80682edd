"""Config file loading for the command line.

One format: a JSON object matching the experiment schema (documented in
the README).  Overrides from flags are applied after the file parse, and
the effective config is what lands in results.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .errors import SchemaError
from .harness import ExperimentConfig

OVERRIDE_KEYS = ("seed", "replicas", "horizon", "engine")


def apply_overrides(data: dict, overrides: Optional[dict]) -> dict:
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in OVERRIDE_KEYS:
            raise ValueError(f"{key!r} is not an overridable config key")
        merged[key] = value
    return merged


def parse_config(path, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Load, override, and validate a config file.

    Distinct failures stay distinct: missing file (FileNotFoundError),
    malformed JSON and schema violations (SchemaError with the full
    problem list).
    """
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError([f"config file {p} is not valid JSON: {exc}"]) from exc
    return ExperimentConfig.from_dict(apply_overrides(data, overrides))


def parse_config_pair(path, overrides: Optional[dict] = None) -> tuple:
    """Load a comparison config: {"even": {...}, "odd": {...}}."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError([f"config file {p} is not valid JSON: {exc}"]) from exc
    if not isinstance(data, dict) or set(data) != {"even", "odd"}:
        raise SchemaError(
            ['comparison config must be an object with exactly the keys '
             '"even" and "odd"']
        )
    even = ExperimentConfig.from_dict(apply_overrides(data["even"], overrides))
    odd = ExperimentConfig.from_dict(apply_overrides(data["odd"], overrides))
    return even, odd
