"""Negative-example sampling from local dataset listings.

Negatives are normal driving scenes. They come from three sources with fixed
quotas; dashcam-style sources get a crop flag so the ego-vehicle bonnet and
dashboard are removed during preprocessing.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..taxonomy import NEGATIVE_CLASS
from .records import Geotag, ImageRecord
from .store import Manifest
from .splits import _stratum_salt


class InsufficientSourceError(ValueError):
    pass


@dataclass(frozen=True)
class NegativesSpec:
    """Per-source sampling quotas plus which sources need the ego crop."""

    quotas: Mapping[str, int] = field(
        default_factory=lambda: {"bdd": 20000, "cityscapes": 10000, "geograph_road_transport": 10000}
    )
    crop_sources: tuple[str, ...] = ("bdd",)

    def __post_init__(self):
        for source, quota in self.quotas.items():
            if quota <= 0:
                raise ValueError(f"quota for {source!r} must be positive")


def _entry_fields(entry) -> tuple[str, str | None, Geotag | None]:
    """Normalize a listing entry to (path, checksum, geotag)."""
    if isinstance(entry, str):
        return entry, None, None
    path = entry["path"]
    checksum = entry.get("checksum")
    geotag = None
    if "lat" in entry or "region" in entry:
        geotag = Geotag(
            lat=float(entry.get("lat", float("nan"))),
            lon=float(entry.get("lon", float("nan"))),
            region=entry.get("region"),
        )
    return path, checksum, geotag


def build_negatives(
    manifest: Manifest,
    spec: NegativesSpec,
    listings: Mapping[str, Sequence],
    seed: int = 0,
) -> int:
    """Sample each source listing down to its quota and add negative records.

    Listing entries are either path strings or dicts with ``path`` plus
    optional ``checksum``/``lat``/``lon``/``region``. Entries without a
    checksum get a placeholder derived from the path; ingesting the actual
    bytes into the blob store replaces it. Sampling is deterministic per seed.
    Returns the number of records added.
    """
    added = 0
    for source in sorted(spec.quotas):
        quota = spec.quotas[source]
        listing = listings.get(source)
        if listing is None or len(listing) < quota:
            have = 0 if listing is None else len(listing)
            raise InsufficientSourceError(
                f"insufficient-source: {source!r} has {have} entries, quota is {quota}"
            )
        rng = np.random.default_rng([seed, _stratum_salt(source)])
        picked = rng.choice(len(listing), size=quota, replace=False)
        records = []
        for idx in sorted(picked):
            path, checksum, geotag = _entry_fields(listing[idx])
            digest = hashlib.sha256(f"{source}:{path}".encode()).hexdigest()
            records.append(
                ImageRecord(
                    id=f"neg-{source}-{digest[:16]}",
                    blob_checksum=checksum or f"pending-{digest}",
                    provider=source,
                    label=NEGATIVE_CLASS,
                    curation_status="accepted",
                    geotag=geotag,
                    crop_flag=source in spec.crop_sources,
                )
            )
        manifest.add_records(records)
        added += len(records)
    return added
