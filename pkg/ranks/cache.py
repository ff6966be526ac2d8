"""
JSON-lines cache of enumerated rank distributions.

One record per line::

    {"shape": "[5]x5", "counts": ["1", "3", ...], "free_param_count": 9,
     "engine_version": "1", "wall_time": 0.01, "computed_at": "..."}

Writers rewrite the whole file through a temporary file in the same
directory and ``os.replace`` it onto the target, so concurrent readers see
either the old or the new file. A single writer is assumed.
"""

import json
import logging
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from .exceptions import CacheCorrupt, RankEngineError
from .shape import parse_shape

logger = logging.getLogger(__name__)


def _ensure_cache_directory(path):
    """Ensure the cache file's directory exists, create if missing."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)


def _validate_record(record, path, line_number):
    """Check one decoded record; returns it with counts as integers."""
    shape_text = record.get("shape") if isinstance(record, dict) else None
    if not isinstance(shape_text, str):
        raise CacheCorrupt(path, line_number, "missing shape")
    try:
        shape = parse_shape(shape_text)
    except RankEngineError as e:
        raise CacheCorrupt(path, line_number, f"unparseable shape: {e}", shape_text)

    counts = record.get("counts")
    if not isinstance(counts, list) or not all(
        isinstance(c, str) and c.isdigit() for c in counts
    ):
        raise CacheCorrupt(path, line_number, "counts must be decimal strings", shape_text)
    counts = [int(c) for c in counts]

    if record.get("free_param_count") != shape.free_param_count:
        raise CacheCorrupt(path, line_number, "free_param_count mismatch", shape_text)
    if len(counts) != shape.max_rank + 1 or counts[0] != 1:
        raise CacheCorrupt(path, line_number, "wrong number of ranks", shape_text)
    if sum(counts) != 1 << shape.free_param_count:
        raise CacheCorrupt(path, line_number, "checksum mismatch", shape_text)
    if "engine_version" not in record:
        raise CacheCorrupt(path, line_number, "missing engine_version", shape_text)

    return {**record, "counts": counts}


def load_records(path):
    """
    Read and validate every record of a cache file.

    Returns:
        list: validated records (empty when the file does not exist)

    Raises:
        CacheCorrupt: naming the first offending line
    """
    path = Path(path)
    if not path.exists():
        return []
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise CacheCorrupt(path, line_number, f"invalid JSON ({e.msg})")
            records.append(_validate_record(record, path, line_number))
    return records


def find_record(path, shape_text, engine_version):
    """Latest record for a canonical shape and engine version, or None."""
    match = None
    for record in load_records(path):
        if record["shape"] == shape_text and record["engine_version"] == engine_version:
            match = record
    return match


def record_for(dist, free_param_count, engine_version, wall_time):
    return {
        "shape": dist.shape,
        "counts": [str(c) for c in dist.counts],
        "free_param_count": free_param_count,
        "engine_version": engine_version,
        "wall_time": round(wall_time, 6),
        "computed_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def append_record(path, record):
    """
    Append a record by atomic replacement of the cache file.

    Existing lines are validated first; a corrupt file is never rewritten.
    """
    path = Path(path)
    _ensure_cache_directory(path)
    load_records(path)
    existing = path.read_text(encoding="utf-8") if path.exists() else ""
    if existing and not existing.endswith("\n"):
        existing += "\n"

    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=f".{path.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(existing)
            f.write(json.dumps(record, sort_keys=True) + "\n")
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.info("Cached %s in %s", record["shape"], path)
    return path
