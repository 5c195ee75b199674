"""Append-only JSON Lines store for retrieval demonstrations.

One record per line, UTF-8, fields exactly: id, domain, source, hypothesis,
reference, feedback (array of strings), provenance, created_at (RFC-3339).
The file only ever grows; loading a file written by append round-trips every
field byte-exactly.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone

PROVENANCE_SIMULATED = "simulated"
PROVENANCE_HUMAN = "human"

_FIELDS = ("id", "domain", "source", "hypothesis", "reference", "feedback", "provenance", "created_at")


class DuplicateRecordError(ValueError):
    pass


@dataclass(frozen=True)
class DemonstrationRecord:
    """One stored example: what the model wrote, what it should have written,
    and the rendered revision instructions between the two."""

    id: str
    domain: str
    source: str
    hypothesis: str
    reference: str
    feedback: tuple[str, ...]
    provenance: str
    created_at: str = ""

    def __post_init__(self):
        if not self.domain:
            raise ValueError("domain must be non-empty")
        if self.provenance not in (PROVENANCE_SIMULATED, PROVENANCE_HUMAN):
            raise ValueError(f"unknown provenance: {self.provenance!r}")
        object.__setattr__(self, "feedback", tuple(self.feedback))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "domain": self.domain,
            "source": self.source,
            "hypothesis": self.hypothesis,
            "reference": self.reference,
            "feedback": list(self.feedback),
            "provenance": self.provenance,
            "created_at": self.created_at,
        }


def make_record_id(domain: str, source: str, hypothesis: str, reference: str) -> str:
    """Content hash over the identifying fields, truncated to 16 hex chars."""
    payload = "\x1f".join((domain, source, hypothesis, reference)).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]


def _parse_line(line: str, path: str, lineno: int) -> DemonstrationRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {lineno}: not valid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: line {lineno}: expected an object")
    missing = [name for name in _FIELDS if name not in obj]
    if missing:
        raise ValueError(f"{path}: line {lineno}: missing fields {missing}")
    try:
        return DemonstrationRecord(
            id=obj["id"],
            domain=obj["domain"],
            source=obj["source"],
            hypothesis=obj["hypothesis"],
            reference=obj["reference"],
            feedback=tuple(obj["feedback"]),
            provenance=obj["provenance"],
            created_at=obj["created_at"],
        )
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: line {lineno}: {exc}") from None


class DemoStore:
    """Demonstration database backed by one JSONL file.

    Single writer, many readers: append serializes through an internal lock;
    records() hands out an immutable snapshot. generation increments on every
    append so index caches can tell when they are stale.
    """

    def __init__(self, path: str, records: list[DemonstrationRecord] | None = None):
        self.path = path
        self._records: list[DemonstrationRecord] = list(records or [])
        self._ids = {rec.id for rec in self._records}
        if len(self._ids) != len(self._records):
            raise DuplicateRecordError(f"{path}: duplicate record ids on load")
        self._lock = threading.Lock()
        self.generation = len(self._records)

    @classmethod
    def load(cls, path: str) -> "DemoStore":
        """Parse an existing store file. Missing file raises FileNotFoundError;
        an empty file is an empty store."""
        records = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                records.append(_parse_line(line, path, lineno))
        return cls(path, records)

    @classmethod
    def open(cls, path: str) -> "DemoStore":
        """Load an existing store or create an empty one at path."""
        if os.path.exists(path):
            return cls.load(path)
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8"):
            pass
        return cls(path)

    def append(self, record: DemonstrationRecord) -> str:
        """Durably append one record, assigning id/created_at when blank.

        Returns the stored id. Raises DuplicateRecordError when the id (given
        or content-derived) is already present.
        """
        with self._lock:
            rec = record
            if not rec.id:
                rec = replace(rec, id=make_record_id(rec.domain, rec.source, rec.hypothesis, rec.reference))
            if not rec.created_at:
                stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
                rec = replace(rec, created_at=stamp)
            if rec.id in self._ids:
                raise DuplicateRecordError(f"record id already stored: {rec.id}")
            line = json.dumps(rec.to_dict(), ensure_ascii=False)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
            self._records.append(rec)
            self._ids.add(rec.id)
            self.generation += 1
            return rec.id

    def get(self, record_id: str) -> DemonstrationRecord:
        for rec in self._records:
            if rec.id == record_id:
                return rec
        raise KeyError(record_id)

    def filter(self, domain: str) -> list[DemonstrationRecord]:
        """Records of one domain, original order."""
        return [rec for rec in self._records if rec.domain == domain]

    def records(self) -> list[DemonstrationRecord]:
        return list(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self.records())
