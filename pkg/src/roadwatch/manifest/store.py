"""SQLite-backed manifest store.

Single-writer, multi-reader: every mutation runs inside one SQLite
transaction, so a manifest file is always consistent on disk and close/reopen
round-trips records bit-exactly.
"""

from __future__ import annotations

import json
import sqlite3
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from ..taxonomy import CANONICAL_CLASS_IDS, INCIDENT_CLASS_IDS, NEGATIVE_CLASS
from .records import (
    CurationDecision,
    GATHERING_TYPES,
    Geotag,
    ImageRecord,
    SPLITS,
    gathering_type,
)

_SCHEMA = """
CREATE TABLE IF NOT EXISTS records (
    id TEXT PRIMARY KEY,
    blob_checksum TEXT NOT NULL,
    provider TEXT NOT NULL,
    label TEXT NOT NULL,
    query_text TEXT,
    query_language TEXT,
    origin_context TEXT,
    origin_incident TEXT,
    rank INTEGER,
    fetched_at TEXT,
    curation_status TEXT NOT NULL DEFAULT 'pending',
    rejection_reason TEXT,
    lat REAL,
    lon REAL,
    region TEXT,
    split TEXT,
    crop_flag INTEGER NOT NULL DEFAULT 0,
    version INTEGER NOT NULL DEFAULT 1
);
CREATE TABLE IF NOT EXISTS decisions (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    record_id TEXT NOT NULL,
    verdict TEXT NOT NULL,
    label TEXT,
    reason TEXT,
    curator_id TEXT NOT NULL,
    decided_at TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_records_status ON records (curation_status);
CREATE INDEX IF NOT EXISTS idx_records_label ON records (label);
CREATE INDEX IF NOT EXISTS idx_decisions_record ON decisions (record_id);
"""


class ManifestError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass
class ClassCountTable:
    """Accepted-image counts per incident class and gathering type."""

    rows: dict[str, dict[str, int]] = field(default_factory=dict)

    def row(self, class_id: str) -> dict[str, int]:
        return dict(self.rows.get(class_id, {g: 0 for g in GATHERING_TYPES}))

    def row_total(self, class_id: str) -> int:
        return sum(self.row(class_id).values())

    def column_total(self, gathering: str) -> int:
        return sum(r.get(gathering, 0) for r in self.rows.values())

    def grand_total(self) -> int:
        return sum(self.row_total(c) for c in self.rows)

    def totals(self) -> tuple[int, int, int, int]:
        return (
            self.column_total("english"),
            self.column_total("non_english"),
            self.column_total("geograph"),
            self.grand_total(),
        )


def record_doc(rec: ImageRecord) -> dict:
    """JSON-ready dict for one record; the export and API wire shape."""
    return {
        "id": rec.id,
        "blob_checksum": rec.blob_checksum,
        "provider": rec.provider,
        "label": rec.label,
        "query_text": rec.query_text,
        "query_language": rec.query_language,
        "origin": list(rec.origin) if rec.origin else None,
        "rank": rec.rank,
        "fetched_at": rec.fetched_at,
        "curation_status": rec.curation_status,
        "rejection_reason": rec.rejection_reason,
        "geotag": (
            {"lat": rec.geotag.lat, "lon": rec.geotag.lon, "region": rec.geotag.region}
            if rec.geotag
            else None
        ),
        "split": rec.split,
        "crop_flag": rec.crop_flag,
        "version": rec.version,
    }


def _row_to_record(row: sqlite3.Row) -> ImageRecord:
    geotag = None
    if row["lat"] is not None or row["region"] is not None:
        geotag = Geotag(
            lat=row["lat"] if row["lat"] is not None else float("nan"),
            lon=row["lon"] if row["lon"] is not None else float("nan"),
            region=row["region"],
        )
    origin = None
    if row["origin_context"] is not None:
        origin = (row["origin_context"], row["origin_incident"])
    return ImageRecord(
        id=row["id"],
        blob_checksum=row["blob_checksum"],
        provider=row["provider"],
        label=row["label"],
        query_text=row["query_text"],
        query_language=row["query_language"],
        origin=origin,
        rank=row["rank"],
        fetched_at=row["fetched_at"],
        curation_status=row["curation_status"],
        rejection_reason=row["rejection_reason"],
        geotag=geotag,
        split=row["split"],
        crop_flag=bool(row["crop_flag"]),
        version=row["version"],
    )


class Manifest:
    """Open (creating if needed) the manifest database at ``path``."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._conn = sqlite3.connect(str(self.path))
        self._conn.row_factory = sqlite3.Row
        with self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "Manifest":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- record CRUD ------------------------------------------------------

    def add_records(self, records: Iterable[ImageRecord]) -> int:
        rows = []
        for rec in records:
            rows.append(
                (
                    rec.id,
                    rec.blob_checksum,
                    rec.provider,
                    rec.label,
                    rec.query_text,
                    rec.query_language,
                    rec.origin[0] if rec.origin else None,
                    rec.origin[1] if rec.origin else None,
                    rec.rank,
                    rec.fetched_at,
                    rec.curation_status,
                    rec.rejection_reason,
                    rec.geotag.lat if rec.geotag else None,
                    rec.geotag.lon if rec.geotag else None,
                    rec.geotag.region if rec.geotag else None,
                    rec.split,
                    int(rec.crop_flag),
                    rec.version,
                )
            )
        with self._conn:
            self._conn.executemany(
                "INSERT INTO records VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?)", rows
            )
        return len(rows)

    def add_record(self, record: ImageRecord) -> None:
        self.add_records([record])

    def get(self, record_id: str) -> ImageRecord | None:
        row = self._conn.execute("SELECT * FROM records WHERE id = ?", (record_id,)).fetchone()
        return _row_to_record(row) if row else None

    def records(
        self,
        status: str | None = None,
        label: str | None = None,
        provider: str | None = None,
        language: str | None = None,
        split: str | None = None,
    ) -> Iterator[ImageRecord]:
        clauses, params = [], []
        for column, value in (
            ("curation_status", status),
            ("label", label),
            ("provider", provider),
            ("query_language", language),
            ("split", split),
        ):
            if value is not None:
                clauses.append(f"{column} = ?")
                params.append(value)
        sql = "SELECT * FROM records"
        if clauses:
            sql += " WHERE " + " AND ".join(clauses)
        sql += " ORDER BY id"
        for row in self._conn.execute(sql, params):
            yield _row_to_record(row)

    def count(self, **filters) -> int:
        return sum(1 for _ in self.records(**filters))

    def ids(self, **filters) -> list[str]:
        return [r.id for r in self.records(**filters)]

    # -- curation ----------------------------------------------------------

    def submit_decision(
        self, decision: CurationDecision, expected_version: int | None = None
    ) -> ImageRecord:
        """Apply a curation decision transactionally.

        Identical resubmission of the current live decision is a no-op (no
        duplicate audit entry). ``expected_version`` enables optimistic
        concurrency: a stale version raises ``version-conflict``.
        """
        with self._conn:
            row = self._conn.execute(
                "SELECT * FROM records WHERE id = ?", (decision.record_id,)
            ).fetchone()
            if row is None:
                raise ManifestError("unknown-record", f"no record {decision.record_id!r}")
            record = _row_to_record(row)
            if expected_version is not None and expected_version != record.version:
                raise ManifestError(
                    "version-conflict",
                    f"record {record.id} is at version {record.version}, "
                    f"decision expected {expected_version}",
                )
            latest = self._conn.execute(
                "SELECT * FROM decisions WHERE record_id = ? ORDER BY seq DESC LIMIT 1",
                (decision.record_id,),
            ).fetchone()
            if latest is not None and (
                latest["verdict"],
                latest["label"],
                latest["reason"],
                latest["curator_id"],
            ) == (decision.verdict, decision.label, decision.reason, decision.curator_id):
                return record

            self._conn.execute(
                "INSERT INTO decisions (record_id, verdict, label, reason, curator_id, decided_at)"
                " VALUES (?,?,?,?,?,?)",
                (
                    decision.record_id,
                    decision.verdict,
                    decision.label,
                    decision.reason,
                    decision.curator_id,
                    decision.decided_at,
                ),
            )
            if decision.verdict == "accept":
                self._conn.execute(
                    "UPDATE records SET curation_status='accepted', label=?,"
                    " rejection_reason=NULL, version=version+1 WHERE id=?",
                    (decision.label, decision.record_id),
                )
            else:
                # Rejected records can never sit in a split.
                self._conn.execute(
                    "UPDATE records SET curation_status='rejected', rejection_reason=?,"
                    " split=NULL, version=version+1 WHERE id=?",
                    (decision.reason, decision.record_id),
                )
        return self.get(decision.record_id)

    def decision_history(self, record_id: str) -> list[CurationDecision]:
        rows = self._conn.execute(
            "SELECT * FROM decisions WHERE record_id = ? ORDER BY seq", (record_id,)
        ).fetchall()
        return [
            CurationDecision(
                record_id=r["record_id"],
                verdict=r["verdict"],
                label=r["label"],
                reason=r["reason"],
                curator_id=r["curator_id"],
                decided_at=r["decided_at"],
            )
            for r in rows
        ]

    def decision_count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM decisions").fetchone()[0]

    def mark_duplicates(self, record_ids: Iterable[str], curator_id: str = "dedup") -> int:
        n = 0
        for record_id in record_ids:
            self.submit_decision(
                CurationDecision(
                    record_id=record_id, verdict="reject", reason="duplicate", curator_id=curator_id
                )
            )
            n += 1
        return n

    # -- split bookkeeping --------------------------------------------------

    def set_splits(self, assignment: dict[str, str | None]) -> None:
        """Set the split column for many records in one transaction."""
        for split in assignment.values():
            if split is not None and split not in SPLITS:
                raise ManifestError("unknown-split", f"{split!r}")
        with self._conn:
            for record_id, split in assignment.items():
                cur = self._conn.execute(
                    "UPDATE records SET split=? WHERE id=? AND curation_status='accepted'",
                    (split, record_id),
                )
                if cur.rowcount == 0 and split is not None:
                    raise ManifestError(
                        "not-accepted", f"cannot assign a split to {record_id!r}"
                    )

    def clear_splits(self) -> None:
        with self._conn:
            self._conn.execute("UPDATE records SET split=NULL")

    # -- reporting -----------------------------------------------------------

    def class_counts(self) -> ClassCountTable:
        """Accepted positives per class and gathering type."""
        table = ClassCountTable(
            rows={c: {g: 0 for g in GATHERING_TYPES} for c in INCIDENT_CLASS_IDS}
        )
        for rec in self.records(status="accepted"):
            if rec.label == NEGATIVE_CLASS:
                continue
            table.rows[rec.label][gathering_type(rec)] += 1
        return table

    def status_counts(self) -> dict[str, dict[str, int]]:
        counts = {
            c: {"pending": 0, "accepted": 0, "rejected": 0} for c in CANONICAL_CLASS_IDS
        }
        for row in self._conn.execute(
            "SELECT label, curation_status, COUNT(*) AS n FROM records"
            " GROUP BY label, curation_status"
        ):
            counts[row["label"]][row["curation_status"]] = row["n"]
        return counts

    def curator_counts(self) -> dict[str, int]:
        return {
            row["curator_id"]: row["n"]
            for row in self._conn.execute(
                "SELECT curator_id, COUNT(*) AS n FROM decisions GROUP BY curator_id"
            )
        }

    def split_counts(self) -> dict[str, dict[str, int]]:
        counts: dict[str, dict[str, int]] = {}
        for row in self._conn.execute(
            "SELECT label, split, COUNT(*) AS n FROM records"
            " WHERE split IS NOT NULL GROUP BY label, split"
        ):
            counts.setdefault(row["label"], {s: 0 for s in SPLITS})[row["split"]] = row["n"]
        return counts

    # -- export ---------------------------------------------------------------

    def export_jsonl(self, path: str | Path) -> int:
        """Dump records as line-delimited JSON for external tooling."""
        n = 0
        with open(path, "w") as fh:
            for rec in self.records():
                fh.write(json.dumps(record_doc(rec), ensure_ascii=False) + "\n")
                n += 1
        return n
