"""Persistent dataset-of-record.

A manifest is a single SQLite file holding every candidate image's
provenance, label, curation status, geotag and split assignment, plus an
append-only audit trail of curation decisions.
"""

from .records import (
    CurationDecision,
    Geotag,
    ImageRecord,
    KNOWN_PROVIDERS,
    NEGATIVE_SOURCES,
    REJECTION_REASONS,
    SEARCH_PROVIDERS,
    SPLITS,
    gathering_type,
)
from .store import ClassCountTable, Manifest, ManifestError
from .regions import RegionMap
from .splits import GeoSplitReport, assign_splits, geo_stratify
from .negatives import InsufficientSourceError, NegativesSpec, build_negatives

__all__ = [
    "ClassCountTable",
    "CurationDecision",
    "Geotag",
    "GeoSplitReport",
    "ImageRecord",
    "InsufficientSourceError",
    "KNOWN_PROVIDERS",
    "Manifest",
    "ManifestError",
    "NEGATIVE_SOURCES",
    "NegativesSpec",
    "REJECTION_REASONS",
    "RegionMap",
    "SEARCH_PROVIDERS",
    "SPLITS",
    "assign_splits",
    "build_negatives",
    "gathering_type",
    "geo_stratify",
]
