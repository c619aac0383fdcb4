"""Append-only newline-delimited JSON result store.

The first line is a header ``{"format": "closednodal-results",
"schema_version": 1}``; every further line is one ResultRecord. Records are
validated against ``RECORD_SCHEMA`` on write and on load.
"""

from __future__ import annotations

import json
import math
import threading
from pathlib import Path

import jsonschema

__all__ = ["RECORD_SCHEMA", "SCHEMA_VERSION", "ResultStore", "read_records", "validate_record"]

SCHEMA_VERSION = 1
HEADER = {"format": "closednodal-results", "schema_version": SCHEMA_VERSION}

_num = {"type": ["number", "null"]}
_nums = {"type": "array", "items": {"type": "number"}}

RECORD_SCHEMA = {
    "type": "object",
    "required": [
        "schema_version",
        "config",
        "domain",
        "h",
        "n_nodes",
        "eigenvalues",
        "gaps",
        "residuals",
        "converged",
        "nodal",
        "topology",
        "timings",
        "error",
    ],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "config": {"type": "object", "additionalProperties": {"type": "string"}},
        "domain": {"type": "object", "additionalProperties": {"type": "string"}},
        "index": {
            "type": ["object", "null"],
            "properties": {"name": {"type": "string"}, "value": {"type": "number"}},
        },
        "h": {"type": "number", "exclusiveMinimum": 0},
        "n_nodes": {"type": "integer", "minimum": 0},
        "under_resolved": {"type": "boolean"},
        "eigenvalues": _nums,
        "gaps": _nums,
        "residuals": _nums,
        "converged": {"type": "boolean"},
        "iterations": {"type": "integer"},
        "simple2": {"type": ["boolean", "null"]},
        "nodal_counts": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "nodal": {
            "type": ["object", "null"],
            "required": ["count", "signs", "verdict", "margin", "min_distance"],
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "signs": {"type": "array", "items": {"enum": [-1, 1]}},
                "verdict": {"type": ["boolean", "null"]},
                "margin": _num,
                "min_distance": _num,
            },
        },
        "topology": {
            "type": ["object", "null"],
            "properties": {
                "components": {"type": "integer", "minimum": 0},
                "holes": {"type": "integer", "minimum": 0},
                "euler": {"type": ["integer", "null"]},
            },
        },
        "timings": {"type": "object", "additionalProperties": {"type": "number"}},
        "error": {"type": ["string", "null"]},
    },
}


def _clean(obj):
    """NaN and infinities are not JSON; store them as null."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def validate_record(record: dict) -> None:
    jsonschema.validate(record, RECORD_SCHEMA)


class ResultStore:
    """Single-writer append-only store; a lock serialises appends from threads."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        if self.path.exists() and self.path.stat().st_size:
            with open(self.path) as f:
                head = json.loads(f.readline())
            if head != HEADER:
                raise ValueError(f"{self.path} is not a version-{SCHEMA_VERSION} result store")
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(json.dumps(HEADER) + "\n")

    def append(self, record: dict) -> dict:
        record = _clean(record)
        validate_record(record)
        line = json.dumps(record, sort_keys=True, allow_nan=False)
        with self._lock, open(self.path, "a") as f:
            f.write(line + "\n")
        return record

    def records(self) -> list[dict]:
        return read_records(self.path)


def read_records(path) -> list[dict]:
    with open(path) as f:
        head = json.loads(f.readline())
        if head.get("schema_version") != SCHEMA_VERSION:
            raise ValueError("unsupported schema version")
        out = []
        for line in f:
            if line.strip():
                rec = json.loads(line)
                validate_record(rec)
                out.append(rec)
    return out
