"""Self-describing stage files: schema-version and config-hash stamping."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import IO, Any

META_PREFIX = "##"

CLEANED = "aistrip.cleaned/1"
TRIPS = "aistrip.trips/1"
FEATURES = "aistrip.features/1"
SPLIT = "aistrip.split/1"
MODEL = "aistrip.model/1"
CV_RESULT = "aistrip.cv/1"
EVAL = "aistrip.eval/1"
CLEAN_REPORT = "aistrip.clean-report/1"
SKIPS = "aistrip.feature-skips/1"
REPORT = "aistrip.report/1"
ANNOTATED = "aistrip.annotated/1"
GEOJSON = "aistrip.geojson/1"


class SchemaError(Exception):
    """Input file does not carry the expected schema."""


def config_hash(params: dict[str, Any]) -> str:
    blob = json.dumps(params, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_meta(fh: IO[str], schema: str, cfg_hash: str) -> None:
    fh.write(f"{META_PREFIX} schema={schema}\n")
    fh.write(f"{META_PREFIX} config={cfg_hash}\n")


def parse_meta_line(line: str) -> tuple[str, str] | None:
    if not line.startswith(META_PREFIX):
        return None
    key, _, value = line[len(META_PREFIX):].strip().partition("=")
    return key.strip(), value.strip()


def check_schema(found: str | None, expected: str, path: str | Path = "") -> None:
    if found != expected:
        where = f" in {path}" if path else ""
        raise SchemaError(f"schema mismatch{where}: expected {expected!r}, found {found!r}")


def dump_json(obj: dict, path: str | Path, schema: str, cfg_hash: str) -> None:
    doc = {"schema": schema, "config": cfg_hash, **obj}
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")


def load_json(path: str | Path, schema: str) -> dict:
    doc = json.loads(Path(path).read_text())
    check_schema(doc.get("schema"), schema, path)
    return doc
