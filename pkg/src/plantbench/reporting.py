"""Deterministic report and table serialization.

Reports are JSON documents with sorted keys and fixed separators, so
identical configurations and seeds produce byte-identical files; the only
volatile data (timestamp, interpreter/library versions of the host) lives in
the separate ``meta`` block.  Rationals are serialized as "numerator/
denominator" strings to keep exact equalities testable downstream.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
import platform
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .model import RNG_NAME


def fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def jsonable(obj):
    """Recursively convert report payloads to plain JSON values."""
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, dict):
        return {str(key): jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = list(obj)
        if isinstance(obj, (set, frozenset)):
            items = sorted(items, key=repr)
        return [jsonable(v) for v in items]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return repr(obj)


def canonical_json(payload) -> str:
    return json.dumps(jsonable(payload), sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def build_report(run: str, config: dict, payload: dict) -> dict:
    """Assemble the full report document around a run payload."""
    return {
        "run": run,
        "config": jsonable(config),
        "config_hash": config_hash(config),
        "library_version": __version__,
        "rng": RNG_NAME,
        "results": jsonable(payload),
        "meta": {
            "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }


def write_report(path: Path, report: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def report_without_meta(path: Path) -> bytes:
    """Canonical bytes of a report with the volatile meta block removed."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    doc.pop("meta", None)
    return canonical_json(doc).encode("utf-8")


def write_table(path: Path, columns: list[str], rows: list[list]) -> Path:
    """Flat CSV table with a header row and stable column order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _cell(value) -> str:
    if isinstance(value, Fraction):
        return fraction_str(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)
