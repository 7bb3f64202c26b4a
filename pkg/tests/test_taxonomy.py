import pytest
import yaml

from roadwatch.taxonomy import (
    Cause,
    DEFAULT_TAXONOMY_DOCUMENT,
    Form,
    INCIDENT_CLASS_IDS,
    TaxonomyError,
    dump_taxonomy,
    grouping_of,
    load_taxonomy,
)


class TestLoadTaxonomy:
    def test_default_has_eight_classes_in_four_groups(self):
        tax = load_taxonomy()
        assert set(tax.incident_ids()) == set(INCIDENT_CLASS_IDS)
        assert len(tax.incident_ids()) == 8
        assert len(tax.groups) == 4
        causes = {g.cause for g in tax.groups}
        forms = {g.form for g in tax.groups}
        assert causes == {Cause.MAN_MADE, Cause.NATURAL}
        assert forms == {Form.OBJECT, Form.COVER}

    def test_duplicate_assignment_rejected(self):
        doc = {
            "groups": {
                "man_made": {"object": ["vehicle_crash"], "cover": ["fire", "collapse", "flooding"]},
                "natural": {
                    "object": ["animal_on_road", "treefall"],
                    "cover": ["flooding", "snow", "landslide"],
                },
            }
        }
        with pytest.raises(TaxonomyError) as exc:
            load_taxonomy(doc)
        assert exc.value.code == "duplicate-assignment"

    def test_missing_class_rejected(self):
        doc = {
            "groups": {
                "man_made": {"object": ["vehicle_crash"], "cover": ["fire", "collapse"]},
                "natural": {"object": ["animal_on_road"], "cover": ["flooding", "snow", "landslide"]},
            }
        }
        with pytest.raises(TaxonomyError) as exc:
            load_taxonomy(doc)
        assert exc.value.code == "missing-class"
        assert "treefall" in str(exc.value)

    def test_unknown_class_rejected(self):
        doc = {
            "groups": {
                "man_made": {"object": ["vehicle_crash", "meteor"], "cover": ["fire", "collapse"]},
                "natural": {
                    "object": ["animal_on_road", "treefall"],
                    "cover": ["flooding", "snow", "landslide"],
                },
            }
        }
        with pytest.raises(TaxonomyError) as exc:
            load_taxonomy(doc)
        assert exc.value.code == "unknown-class"

    def test_negative_cannot_be_grouped(self):
        doc = {
            "groups": {
                "man_made": {"object": ["vehicle_crash", "negative"], "cover": ["fire", "collapse"]},
                "natural": {
                    "object": ["animal_on_road", "treefall"],
                    "cover": ["flooding", "snow", "landslide"],
                },
            }
        }
        with pytest.raises(TaxonomyError) as exc:
            load_taxonomy(doc)
        assert exc.value.code == "negative-in-group"

    def test_loads_packaged_config_file(self):
        from roadwatch.cli import _DATA_DIR

        tax = load_taxonomy(_DATA_DIR / "taxonomy.yaml")
        assert set(tax.incident_ids()) == set(INCIDENT_CLASS_IDS)


class TestGroupingOf:
    def test_flooding_is_natural_cover(self):
        tax = load_taxonomy()
        g = grouping_of(tax, "flooding")
        assert g.as_tuple() == ("natural", "cover")

    def test_treefall_is_natural_object(self):
        tax = load_taxonomy()
        assert grouping_of(tax, "treefall").as_tuple() == ("natural", "object")

    def test_vehicle_crash_is_man_made_object(self):
        tax = load_taxonomy()
        assert grouping_of(tax, "vehicle_crash").as_tuple() == ("man_made", "object")

    def test_negative_has_no_grouping(self):
        tax = load_taxonomy()
        with pytest.raises(TaxonomyError) as exc:
            grouping_of(tax, "negative")
        assert exc.value.code == "no-grouping"

    def test_unknown_id_rejected(self):
        tax = load_taxonomy()
        with pytest.raises(TaxonomyError):
            grouping_of(tax, "earthquake")


class TestInvariants:
    def test_groups_partition_the_incident_classes(self):
        tax = load_taxonomy()
        seen = []
        for members in tax.groups.values():
            seen.extend(c.id for c in members)
        assert sorted(seen) == sorted(INCIDENT_CLASS_IDS)

    def test_round_trip(self, tmp_path):
        tax = load_taxonomy()
        path = tmp_path / "tax.yaml"
        dump_taxonomy(tax, path)
        again = load_taxonomy(path)
        assert again == tax

    def test_document_round_trip_matches_default(self):
        doc = yaml.safe_load(yaml.safe_dump(DEFAULT_TAXONOMY_DOCUMENT))
        assert load_taxonomy(doc) == load_taxonomy()
