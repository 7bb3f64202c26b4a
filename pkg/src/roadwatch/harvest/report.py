"""Source-distribution accounting over a manifest."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..manifest.records import gathering_type
from ..manifest.store import Manifest
from ..taxonomy import NEGATIVE_CLASS


@dataclass
class HarvestReport:
    """Retrieved/retained counts per (class, provider, language) cell.

    ``retained`` means accepted at curation; retrieved counts every record
    regardless of status, so retained <= retrieved cell-by-cell.
    """

    cells: dict[tuple[str, str, str], dict[str, int]] = field(default_factory=dict)
    gathering_retained: dict[str, int] = field(
        default_factory=lambda: {"english": 0, "non_english": 0, "geograph": 0}
    )

    def cell(self, label: str, provider: str, language: str) -> dict[str, int]:
        return dict(self.cells.get((label, provider, language), {"retrieved": 0, "retained": 0}))

    def class_total(self, label: str) -> int:
        return sum(v["retained"] for (l, _, _), v in self.cells.items() if l == label)

    def provider_total(self, provider: str) -> int:
        return sum(v["retained"] for (_, p, _), v in self.cells.items() if p == provider)

    def retained_total(self) -> int:
        return sum(self.gathering_retained.values())

    def retrieved_total(self) -> int:
        return sum(v["retrieved"] for v in self.cells.values())


def harvest_report(manifest: Manifest) -> HarvestReport:
    """Tabulate the manifest's positive records by class, provider, language.

    Negatives are sampled rather than harvested, so they stay out of this
    report. An empty manifest yields an all-zero report.
    """
    report = HarvestReport()
    for rec in manifest.records():
        if rec.label == NEGATIVE_CLASS:
            continue
        language = rec.query_language or "en"
        key = (rec.label, rec.provider, language)
        cell = report.cells.setdefault(key, {"retrieved": 0, "retained": 0})
        cell["retrieved"] += 1
        if rec.curation_status == "accepted":
            cell["retained"] += 1
            report.gathering_retained[gathering_type(rec)] += 1
    return report
