"""Incident taxonomy: the eight incident classes plus the negative class,
organized on two binary axes (cause: man-made or natural; form: discrete
object or continuous cover).

The taxonomy ships as an editable YAML document rather than hardcoded
constants so the tree can be deepened or regrouped without a code change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import yaml

NEGATIVE_CLASS = "negative"

INCIDENT_CLASS_IDS = (
    "animal_on_road",
    "collapse",
    "fire",
    "flooding",
    "landslide",
    "snow",
    "treefall",
    "vehicle_crash",
)

CANONICAL_CLASS_IDS = INCIDENT_CLASS_IDS + (NEGATIVE_CLASS,)

# Presentation/logit ordering used by the trainer and evaluation reports.
DEFAULT_CLASS_ORDER = (
    "animal_on_road",
    "collapse",
    "vehicle_crash",
    "fire",
    "flooding",
    "landslide",
    "treefall",
    "snow",
    NEGATIVE_CLASS,
)


class Cause(str, Enum):
    MAN_MADE = "man_made"
    NATURAL = "natural"


class Form(str, Enum):
    OBJECT = "object"
    COVER = "cover"


class TaxonomyError(ValueError):
    """Raised when a taxonomy document fails validation."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class Grouping:
    cause: Cause
    form: Form

    def as_tuple(self) -> tuple[str, str]:
        return (self.cause.value, self.form.value)


@dataclass(frozen=True)
class IncidentClass:
    id: str
    display_name: str
    definition: str

    def __post_init__(self):
        if self.id not in CANONICAL_CLASS_IDS:
            raise TaxonomyError("unknown-class", f"{self.id!r} is not a recognized class id")


@dataclass(frozen=True)
class Taxonomy:
    """Validated incident class tree.

    ``groups`` maps each (cause, form) leaf-parent to the incident classes
    assigned to it. The negative class sits outside the tree.
    """

    root: str
    groups: dict[Grouping, tuple[IncidentClass, ...]]
    classes: dict[str, IncidentClass] = field(default_factory=dict)

    def grouping_of(self, class_id: str) -> Grouping:
        """Return the (cause, form) pair that places ``class_id`` in the tree."""
        if class_id == NEGATIVE_CLASS:
            raise TaxonomyError("no-grouping", "the negative class has no grouping")
        if class_id not in self.classes:
            raise TaxonomyError("unknown-class", f"{class_id!r} is not a recognized class id")
        for grouping, members in self.groups.items():
            if any(c.id == class_id for c in members):
                return grouping
        raise TaxonomyError("missing-class", f"{class_id!r} has no group assignment")

    def incident_ids(self) -> tuple[str, ...]:
        return tuple(sorted(c for c in self.classes if c != NEGATIVE_CLASS))

    def to_document(self) -> dict:
        """Serialize back to the config-document shape accepted by load_taxonomy."""
        groups: dict = {}
        for grouping, members in self.groups.items():
            cause = groups.setdefault(grouping.cause.value, {})
            cause[grouping.form.value] = [c.id for c in members]
        doc = {
            "root": self.root,
            "groups": groups,
            "classes": {
                c.id: {"display_name": c.display_name, "definition": c.definition}
                for c in self.classes.values()
            },
        }
        return doc


# Working definitions shown to curators alongside each label. Editable via the
# taxonomy config; these are the shipped defaults.
_DEFAULT_CLASS_INFO = {
    "animal_on_road": (
        "Animal on Road",
        "An animal, alive or dead, on or immediately beside the driving surface.",
    ),
    "collapse": (
        "Road Collapse",
        "A break-up of the driving surface severe enough that an ordinary vehicle "
        "could not pass without damage.",
    ),
    "fire": (
        "Fire",
        "An active, uncontrolled fire in view that affects, or if unchecked would "
        "affect, driving conditions.",
    ),
    "flooding": (
        "Flooded Road",
        "Standing water covering part of the driving surface deeply enough to make "
        "drivers alter their behaviour.",
    ),
    "landslide": (
        "Landslide",
        "Earth, rock, or natural debris that has slid from higher ground and settled "
        "on the driving surface.",
    ),
    "snow": (
        "Snow on Road",
        "Snow lying on the driving surface in any amount that would make drivers "
        "alter their behaviour.",
    ),
    "treefall": (
        "Treefall",
        "A tree, trunk, or large branch leaning over or lying on the driving surface "
        "so that it obstructs traffic.",
    ),
    "vehicle_crash": (
        "Vehicle Crash",
        "A visible collision between motor vehicles, or between a motor vehicle and "
        "something in the environment.",
    ),
    NEGATIVE_CLASS: (
        "Negative",
        "A normal driving scene with no incident affecting the road.",
    ),
}

# Leaf-to-group assignment shipped by default. The flooding/treefall/crash
# placements follow directly from the class semantics; the remaining five are
# best-effort defaults and can be regrouped in the config file.
DEFAULT_TAXONOMY_DOCUMENT: dict = {
    "root": "unsigned_physical_incident",
    "groups": {
        "man_made": {
            "object": ["vehicle_crash"],
            "cover": ["fire", "collapse"],
        },
        "natural": {
            "object": ["animal_on_road", "treefall"],
            "cover": ["flooding", "snow", "landslide"],
        },
    },
    "classes": {
        cid: {"display_name": name, "definition": definition}
        for cid, (name, definition) in _DEFAULT_CLASS_INFO.items()
    },
}


def load_taxonomy(document: dict | str | Path | None = None) -> Taxonomy:
    """Validate a taxonomy config document and return a Taxonomy.

    ``document`` may be a parsed mapping, a YAML string, a path to a YAML
    file, or None for the shipped default. Every incident class must appear
    in exactly one (cause, form) group; the negative class must not appear
    in any group.
    """
    if document is None:
        doc = DEFAULT_TAXONOMY_DOCUMENT
    elif isinstance(document, dict):
        doc = document
    else:
        path = Path(document)
        if path.exists():
            doc = yaml.safe_load(path.read_text())
        else:
            doc = yaml.safe_load(str(document))
    if not isinstance(doc, dict) or "groups" not in doc:
        raise TaxonomyError("malformed-config", "expected a mapping with a 'groups' key")

    class_info = doc.get("classes", {})
    classes: dict[str, IncidentClass] = {}
    for cid in CANONICAL_CLASS_IDS:
        name, definition = _DEFAULT_CLASS_INFO[cid]
        info = class_info.get(cid, {})
        classes[cid] = IncidentClass(
            id=cid,
            display_name=info.get("display_name", name),
            definition=info.get("definition", definition),
        )
    for cid in class_info:
        if cid not in CANONICAL_CLASS_IDS:
            raise TaxonomyError("unknown-class", f"{cid!r} is not a recognized class id")

    groups: dict[Grouping, tuple[IncidentClass, ...]] = {}
    seen: dict[str, Grouping] = {}
    for cause_key, forms in doc["groups"].items():
        try:
            cause = Cause(cause_key)
        except ValueError:
            raise TaxonomyError("unknown-cause", f"{cause_key!r} is not a cause axis value")
        for form_key, members in forms.items():
            try:
                form = Form(form_key)
            except ValueError:
                raise TaxonomyError("unknown-form", f"{form_key!r} is not a form axis value")
            grouping = Grouping(cause, form)
            assigned = []
            for cid in members:
                if cid == NEGATIVE_CLASS:
                    raise TaxonomyError(
                        "negative-in-group", "the negative class cannot be grouped"
                    )
                if cid not in CANONICAL_CLASS_IDS:
                    raise TaxonomyError("unknown-class", f"{cid!r} is not a recognized class id")
                if cid in seen:
                    raise TaxonomyError(
                        "duplicate-assignment",
                        f"{cid!r} assigned to both {seen[cid].as_tuple()} and {grouping.as_tuple()}",
                    )
                seen[cid] = grouping
                assigned.append(classes[cid])
            groups[grouping] = tuple(assigned)

    missing = set(INCIDENT_CLASS_IDS) - set(seen)
    if missing:
        raise TaxonomyError("missing-class", f"no group assignment for {sorted(missing)}")

    return Taxonomy(root=doc.get("root", "unsigned_physical_incident"), groups=groups, classes=classes)


def grouping_of(taxonomy: Taxonomy, class_id: str) -> Grouping:
    """Module-level convenience wrapper around Taxonomy.grouping_of."""
    return taxonomy.grouping_of(class_id)


def dump_taxonomy(taxonomy: Taxonomy, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(taxonomy.to_document(), sort_keys=True))
