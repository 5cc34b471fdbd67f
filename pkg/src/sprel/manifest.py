"""Artifact IO: atomic writes, provenance headers, JSONL helpers.

Every artifact the toolkit writes starts with a provenance record so a
rerun can be checked against the inputs and seeds that produced it.
JSONL artifacts carry it as a first line ``{"__provenance__": {...}}``;
CSV/text artifacts carry it as a leading ``#``-prefixed comment line.
Readers skip either form. No timestamps are embedded: identical inputs
and seeds must produce byte-identical artifacts.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from contextlib import contextmanager
from typing import Any, Iterable, Iterator

from .errors import ParseError

TOOL_NAME = "sprel"
TOOL_VERSION = "0.1.0"

PROVENANCE_KEY = "__provenance__"


def config_digest(config: Any) -> str:
    """Stable digest of a JSON-serializable configuration object."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def provenance(artifact: str, *, seed: int | None = None, config: Any = None,
               extra: dict[str, Any] | None = None) -> dict[str, Any]:
    record: dict[str, Any] = {
        "artifact": artifact,
        "tool": f"{TOOL_NAME} {TOOL_VERSION}",
    }
    if seed is not None:
        record["seed"] = seed
    if config is not None:
        record["config_digest"] = config_digest(config)
    if extra:
        record.update(extra)
    return record


@contextmanager
def atomic_write(path: str | os.PathLike, mode: str = "w") -> Iterator[Any]:
    """Write to a temp file in the target directory, rename on success.

    A failed write never leaves a partial artifact behind.
    """
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, encoding=None if "b" in mode else "utf-8", newline=None if "b" in mode else "\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_jsonl(path: str | os.PathLike, records: Iterable[dict], header: dict[str, Any] | None = None) -> int:
    """Write records as JSON lines, optionally preceded by a provenance line.

    Returns the number of data records written.
    """
    n = 0
    with atomic_write(path) as fh:
        if header is not None:
            fh.write(json.dumps({PROVENANCE_KEY: header}, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
            n += 1
    return n


def read_jsonl(path: str | os.PathLike) -> Iterator[dict]:
    """Yield data records from a JSON-lines file, skipping provenance lines."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if isinstance(record, dict) and PROVENANCE_KEY in record:
                continue
            if not isinstance(record, dict):
                raise ParseError(f"{path}:{lineno}: expected a JSON object")
            yield record


def read_provenance(path: str | os.PathLike) -> dict[str, Any] | None:
    """Return the provenance record of an artifact, if it has one.

    Handles both the JSONL wrapper record and the bare ``#``-comment form
    used by CSV/text artifacts.
    """
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    if not first:
        return None
    commented = first.startswith("#")
    if commented:
        first = first.lstrip("# ")
    try:
        record = json.loads(first)
    except json.JSONDecodeError:
        return None
    if not isinstance(record, dict):
        return None
    if PROVENANCE_KEY in record:
        return record[PROVENANCE_KEY]
    return record if commented else None


def write_json(path: str | os.PathLike, document: dict, header: dict[str, Any] | None = None) -> None:
    """Write a single structured JSON document with embedded provenance."""
    if header is not None:
        document = {PROVENANCE_KEY: header, **document}
    with atomic_write(path) as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: str | os.PathLike) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ParseError(f"{path}: expected a JSON object at top level")
    return document
