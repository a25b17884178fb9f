"""
Shared utilities for reading and writing line-delimited JSON records with
de-duplication by id.
"""

import json
import logging
from pathlib import Path

logger = logging.getLogger(__name__)


def read_jsonl_with_deduplication(path, id_field: str = "id") -> list:
    """
    Read all records from a JSONL file, keeping the first record per id.

    Records without an id are kept as-is. Blank lines are ignored.

    Args:
        path: File to read
        id_field: Field used for de-duplication (default: "id"); None keeps every record

    Returns:
        list of dict records in file order
    """
    path = Path(path)
    logger.info(f"Reading records from {path}...")

    records = []
    seen_ids = set()
    duplicates = 0
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{line_no}: invalid JSON ({e.msg})") from e
            if not isinstance(record, dict):
                raise ValueError(f"{path}:{line_no}: expected an object, got {type(record).__name__}")

            record_id = record.get(id_field)
            if record_id is None:
                records.append(record)
            elif record_id not in seen_ids:
                records.append(record)
                seen_ids.add(record_id)
            else:
                duplicates += 1

    if duplicates:
        logger.warning(f"  ⚠️ Dropped {duplicates} records with duplicate {id_field}")
    logger.info(f"  ✅ Read {len(records)} unique records from {path}")
    return records


def dumps_record(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def write_jsonl(path, records) -> Path:
    """Write records one per line, UTF-8, keys sorted."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [dumps_record(record) for record in records]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    logger.info(f"  ✅ Wrote {len(lines)} records to {path}")
    return path


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")
    return path
