"""JSON summaries and CSV tables written by the command line front end.

Every summary shares one envelope (schema version, command, verdict, seed,
resolved config, config hash, shard layout, timings, result) and is checked
against ``SUMMARY_SCHEMA`` both before it is written and after re-reading.
CSV floats use ``repr`` so that reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import jsonschema

SCHEMA_VERSION = "1.0"

_SCALAR = {"type": ["number", "integer", "string", "boolean", "null"]}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "command": {"type": "string"},
        "l": {"type": "integer", "minimum": 2},
        "phi": {"type": ["string", "object"]},
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
        "x": {"type": "number"},
        "z": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "itinerary": {"type": "string"},
        "N": {"type": "integer", "minimum": 1},
        "depth": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 1},
        "M": {"type": "integer", "minimum": 2},
        "n_max": {"type": "integer", "minimum": 1},
        "samples": {"type": "integer", "minimum": 1},
        "max_prefix": {"type": "integer", "minimum": 1},
        "grid": {"type": "integer", "minimum": 1},
        "budget": {"type": "integer", "minimum": 1},
        "half_width": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
        "leaf_samples": {"type": "integer", "minimum": 5},
        "m0": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "boxes": {"type": "array", "items": {"type": "array", "items": {"type": "number"},
                                             "minItems": 4, "maxItems": 4}, "minItems": 1},
        "eps": {"type": "number", "minimum": 0},
        "q": {"type": ["string", "object"]},
        "r": {"type": ["string", "object"]},
        "observables": {"type": "array", "items": {"type": "string"}},
        "psi": {"type": "string"},
        "chi": {"type": "string"},
        "a": {"type": "integer"},
        "b": {"type": ["string", "integer", "number"]},
        "point": {"type": "array", "items": {"type": ["string", "number"]}, "minItems": 2, "maxItems": 2},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "stride": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "command", "verdict", "seed", "config", "config_hash",
                 "shards", "timings", "result", "files", "backend"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"type": "string"},
        "verdict": {"type": "string"},
        "seed": {"type": ["integer", "null"]},
        "config": {"type": "object"},
        "config_hash": {"type": "string", "pattern": "^[0-9a-f]{12}$"},
        "shards": {"type": "object", "additionalProperties": {"type": "integer"}},
        "timings": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "result": {"type": "object"},
        "files": {"type": "array", "items": {"type": "string"}},
        "backend": {"type": "string"},
        "scope": {"type": "string"},
    },
    "additionalProperties": False,
}

CSV_HEADERS = {
    "ergodicity": ["observable", "start", "x0", "y0", "time_average", "space_average"],
    "mixing": ["n", "C", "stderr"],
    "leaf": ["x", "y", "arclength"],
    "reindex": ["k", "a_k", "b_k", "e_x", "e_y"],
    "birkhoff": ["observable", "n", "time_average", "space_average"],
    "cylinder": ["depth", "samples", "hits", "estimate", "stderr"],
}


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def validate_config(config: dict) -> None:
    jsonschema.validate(config, CONFIG_SCHEMA)


def validate_summary(summary: dict) -> None:
    jsonschema.validate(summary, SUMMARY_SCHEMA)


def _plain(obj):
    """Convert numpy scalars and arrays into JSON-native values."""
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def emit_report(out_dir, command: str, verdict: str, config: dict, result: dict,
                seed: int | None = None, shards: dict | None = None, timings: dict | None = None,
                tables: dict | None = None, backend: str = "", scope: str | None = None) -> dict:
    """Write ``<command>.json`` and any CSV tables; returns the validated summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name, (header, rows) in (tables or {}).items():
        files.append(write_csv(out / f"{name}.csv", header, rows).name)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "verdict": verdict,
        "seed": seed,
        "config": _plain(config),
        "config_hash": config_hash(config),
        "shards": dict(shards or {}),
        "timings": dict(timings or {}),
        "result": _plain(result),
        "files": files,
        "backend": backend,
    }
    if scope:
        summary["scope"] = scope
    validate_summary(summary)
    path = out / f"{command}.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True, allow_nan=True) + "\n")
    validate_summary(json.loads(path.read_text()))
    summary["files"] = files + [path.name]
    return summary


def load_summary(path) -> dict:
    data = json.loads(Path(path).read_text())
    validate_summary(data)
    return data
