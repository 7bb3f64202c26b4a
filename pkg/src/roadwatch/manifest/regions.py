"""Region resolution for geotagged records.

Regions are an ordered list of lat/lon bounding boxes; the first box
containing a point wins, so the effective regions partition the plane even
where raw boxes overlap. Points outside every box resolve to "other".

The shipped boxes are coarse approximations of the four countries the
geo-stratified split cares about; campaigns needing sharper borders can load
their own box file (or rely on the region name already present on a
record's geotag, which always takes precedence).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

KNOWN_REGIONS = ("england", "scotland", "ireland", "wales", "other")

# (name, lat_min, lat_max, lon_min, lon_max); order matters.
_DEFAULT_BOXES = [
    ("wales", 51.3, 53.5, -5.4, -2.65),
    ("ireland", 51.2, 55.6, -10.8, -5.4),
    ("scotland", 54.8, 61.0, -9.0, 0.5),
    ("england", 49.8, 55.9, -6.5, 2.0),
]


@dataclass(frozen=True)
class RegionBox:
    name: str
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def contains(self, lat: float, lon: float) -> bool:
        return self.lat_min <= lat <= self.lat_max and self.lon_min <= lon <= self.lon_max


class RegionMap:
    def __init__(self, boxes: list[RegionBox] | None = None):
        self.boxes = boxes if boxes is not None else [RegionBox(*b) for b in _DEFAULT_BOXES]
        for box in self.boxes:
            if box.name not in KNOWN_REGIONS:
                raise ValueError(f"unknown region {box.name!r}")
            if box.lat_min >= box.lat_max or box.lon_min >= box.lon_max:
                raise ValueError(f"degenerate box for {box.name!r}")

    @classmethod
    def load(cls, path: str | Path | None = None) -> "RegionMap":
        if path is None:
            return cls()
        doc = yaml.safe_load(Path(path).read_text())
        boxes = [
            RegionBox(
                name=b["name"],
                lat_min=float(b["lat_min"]),
                lat_max=float(b["lat_max"]),
                lon_min=float(b["lon_min"]),
                lon_max=float(b["lon_max"]),
            )
            for b in doc["boxes"]
        ]
        return cls(boxes)

    def resolve(self, lat: float, lon: float) -> str:
        """Return the first region whose box contains the point, else "other"."""
        for box in self.boxes:
            if box.contains(lat, lon):
                return box.name
        return "other"

    def region_of(self, geotag) -> str:
        """Region for a Geotag: an explicit region name wins over the boxes."""
        if geotag is None:
            raise ValueError("record has no geotag")
        if geotag.region is not None:
            if geotag.region not in KNOWN_REGIONS:
                raise ValueError(f"unknown region {geotag.region!r}")
            return geotag.region
        return self.resolve(geotag.lat, geotag.lon)
