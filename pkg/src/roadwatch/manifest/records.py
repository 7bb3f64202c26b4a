"""Record types stored in the manifest."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

from ..taxonomy import CANONICAL_CLASS_IDS, NEGATIVE_CLASS

CURATION_STATUSES = ("pending", "accepted", "rejected")
REJECTION_REASONS = (
    "bad_viewport",
    "rotated",
    "multi_incident",
    "not_incident",
    "duplicate",
    "other",
)
SPLITS = ("train", "val", "test")

SEARCH_PROVIDERS = ("google", "bing", "flickr", "geograph", "local-fixture")
# Negative examples are sampled from local dataset listings, not search APIs,
# but they carry a provider id so every record's provenance reads the same way.
NEGATIVE_SOURCES = ("bdd", "cityscapes", "geograph_road_transport")
KNOWN_PROVIDERS = SEARCH_PROVIDERS + NEGATIVE_SOURCES

GEOGRAPH_PROVIDERS = ("geograph", "geograph_road_transport")

GATHERING_TYPES = ("english", "non_english", "geograph")


@dataclass(frozen=True)
class Geotag:
    lat: float
    lon: float
    region: str | None = None


@dataclass
class ImageRecord:
    """One candidate or accepted image.

    A record carries exactly one label; images showing several incidents are
    rejected at curation rather than multi-labeled. ``split`` may only be set
    while the record is accepted.
    """

    id: str
    blob_checksum: str
    provider: str
    label: str
    query_text: str | None = None
    query_language: str | None = None
    origin: tuple[str, str] | None = None
    rank: int | None = None
    fetched_at: str | None = None
    curation_status: str = "pending"
    rejection_reason: str | None = None
    geotag: Geotag | None = None
    split: str | None = None
    crop_flag: bool = False
    version: int = 1

    def __post_init__(self):
        if self.provider not in KNOWN_PROVIDERS:
            raise ValueError(f"unregistered provider {self.provider!r}")
        if self.label not in CANONICAL_CLASS_IDS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.curation_status not in CURATION_STATUSES:
            raise ValueError(f"unknown curation status {self.curation_status!r}")
        if self.rejection_reason is not None and self.rejection_reason not in REJECTION_REASONS:
            raise ValueError(f"unknown rejection reason {self.rejection_reason!r}")
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")
        if self.split is not None and self.curation_status != "accepted":
            raise ValueError("split may only be set on accepted records")

    @property
    def is_positive(self) -> bool:
        return self.label != NEGATIVE_CLASS


@dataclass(frozen=True)
class CurationDecision:
    """One accept/reject verdict from a curator.

    Later decisions supersede earlier ones; all are kept in the audit trail.
    """

    record_id: str
    verdict: str  # "accept" | "reject"
    label: str | None = None
    reason: str | None = None
    curator_id: str = "anonymous"
    decided_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def __post_init__(self):
        if self.verdict not in ("accept", "reject"):
            raise ValueError(f"verdict must be accept or reject, got {self.verdict!r}")
        if self.verdict == "accept":
            if self.label is None:
                raise ValueError("accept decisions require a label")
            if self.label not in CANONICAL_CLASS_IDS:
                raise ValueError(f"label {self.label!r} is not in the taxonomy")
        if self.verdict == "reject" and self.reason not in REJECTION_REASONS:
            raise ValueError("reject decisions require a valid reason")


def gathering_type(record: ImageRecord) -> str:
    """Classify a record by how it was gathered.

    Geograph exports count as their own gathering type regardless of query
    language; everything else splits on the query language.
    """
    if record.provider in GEOGRAPH_PROVIDERS:
        return "geograph"
    if record.query_language is not None and record.query_language != "en":
        return "non_english"
    return "english"
