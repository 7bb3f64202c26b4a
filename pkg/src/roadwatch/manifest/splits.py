"""Split assignment: per-class stratified random splits and the
geo-stratified variant that holds out one region entirely.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..taxonomy import NEGATIVE_CLASS
from .records import GEOGRAPH_PROVIDERS, SPLITS
from .regions import RegionMap
from .store import Manifest, ManifestError

logger = logging.getLogger(__name__)

GEO_CLASSES = ("animal_on_road", "flooding", "snow")
HOLDOUT_REGION = "wales"


def _apportion(n: int, ratios: tuple[float, ...]) -> list[int]:
    """Split n items into len(ratios) parts by largest remainder.

    Each part differs from its exact share ratio*n by strictly less than 1.
    Ties in fractional part go to the earlier ratio.
    """
    exact = [r * n for r in ratios]
    base = [math.floor(e) for e in exact]
    short = n - sum(base)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - base[i]), i))
    for i in order[:short]:
        base[i] += 1
    return base


def _shuffled(ids: list[str], seed: int, salt: int) -> list[str]:
    """Deterministic per-stratum shuffle, independent of insertion order."""
    ids = sorted(ids)
    rng = np.random.default_rng([seed, salt])
    return [ids[i] for i in rng.permutation(len(ids))]


def _stratum_salt(name: str) -> int:
    return int.from_bytes(name.encode("utf-8")[:8].ljust(8, b"\0"), "big") & 0x7FFFFFFF


def assign_splits(
    manifest: Manifest,
    ratios: tuple[float, float, float] = (0.70, 0.20, 0.10),
    seed: int = 0,
) -> dict[str, dict[str, int]]:
    """Assign train/val/test splits stratified per class.

    Deterministic given the seed; per class, each split's size differs from
    the exact proportion by at most one record. Returns the per-class split
    sizes that were assigned.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ManifestError("bad-ratios", f"split ratios must sum to 1, got {ratios}")
    accepted = list(manifest.records(status="accepted"))
    if not accepted:
        raise ManifestError("empty-manifest", "no accepted records to split")

    by_class: dict[str, list[str]] = {}
    for rec in accepted:
        by_class.setdefault(rec.label, []).append(rec.id)

    assignment: dict[str, str | None] = {}
    sizes: dict[str, dict[str, int]] = {}
    for label in sorted(by_class):
        ids = _shuffled(by_class[label], seed, _stratum_salt(label))
        parts = _apportion(len(ids), ratios)
        sizes[label] = dict(zip(SPLITS, parts))
        start = 0
        for split, count in zip(SPLITS, parts):
            for record_id in ids[start : start + count]:
                assignment[record_id] = split
            start += count
    manifest.set_splits(assignment)
    return sizes


@dataclass
class GeoSplitReport:
    """What a geo-stratified assignment actually produced."""

    sizes: dict[str, dict[str, int]] = field(default_factory=dict)  # label -> split -> n
    holdout_n: int = 0
    geograph_split_fractions: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ungeotagged_to_train: int = 0

    def total(self, split: str) -> int:
        return sum(v.get(split, 0) for v in self.sizes.values())


def geo_stratify(
    manifest: Manifest,
    region_map: RegionMap | None = None,
    classes: tuple[str, ...] = GEO_CLASSES,
    seed: int = 0,
    geograph_train_val: tuple[float, float] = (0.725, 0.225),
    harvested_train_val: tuple[float, float] = (0.75, 0.25),
) -> GeoSplitReport:
    """Region-held-out split over the classes with reliable geotags.

    Geograph-sourced records in the holdout region (Wales) all go to test.
    Remaining Geograph records split train/val at the 72.5:22.5 relative
    proportion; harvested (non-Geograph) records split 75/25 train/val and
    never reach test. Negatives participate in full, with Geograph-sourced
    negatives eligible for test through their region like any other Geograph
    record. Classes outside the experiment lose their split assignment.
    Geograph records with no usable geotag are routed to train with a warning.
    """
    region_map = region_map or RegionMap()
    selected = tuple(classes) + (NEGATIVE_CLASS,)
    g_train, g_val = geograph_train_val
    geograph_ratios = (g_train / (g_train + g_val), g_val / (g_train + g_val))

    report = GeoSplitReport()
    assignment: dict[str, str | None] = {}
    pools: dict[tuple[str, str], list[str]] = {}  # (label, pool) -> ids

    for rec in manifest.records():
        if rec.curation_status != "accepted":
            continue
        if rec.label not in selected:
            assignment[rec.id] = None
            continue
        if rec.provider in GEOGRAPH_PROVIDERS:
            if rec.geotag is None:
                logger.warning("geograph record %s has no geotag; routed to train", rec.id)
                report.ungeotagged_to_train += 1
                assignment[rec.id] = "train"
                continue
            region = region_map.region_of(rec.geotag)
            if region == HOLDOUT_REGION:
                assignment[rec.id] = "test"
                report.holdout_n += 1
                continue
            pools.setdefault((rec.label, "geograph"), []).append(rec.id)
        else:
            pools.setdefault((rec.label, "harvested"), []).append(rec.id)

    for (label, pool), ids in sorted(pools.items()):
        ratios = geograph_ratios if pool == "geograph" else harvested_train_val
        ordered = _shuffled(ids, seed, _stratum_salt(f"{label}/{pool}"))
        n_train, n_val = _apportion(len(ordered), ratios)
        for record_id in ordered[:n_train]:
            assignment[record_id] = "train"
        for record_id in ordered[n_train:]:
            assignment[record_id] = "val"

    manifest.set_splits(assignment)

    for label in selected:
        report.sizes[label] = {s: 0 for s in SPLITS}
    for record_id, split in assignment.items():
        if split is None:
            continue
        rec = manifest.get(record_id)
        report.sizes[rec.label][split] += 1

    geograph_total = sum(
        1
        for rec in manifest.records(status="accepted")
        if rec.provider in GEOGRAPH_PROVIDERS and rec.label in selected and rec.split is not None
    )
    if geograph_total:
        by_split = {s: 0 for s in SPLITS}
        for rec in manifest.records(status="accepted"):
            if rec.provider in GEOGRAPH_PROVIDERS and rec.label in selected and rec.split:
                by_split[rec.split] += 1
        report.geograph_split_fractions = tuple(
            by_split[s] / geograph_total for s in SPLITS
        )
    return report
