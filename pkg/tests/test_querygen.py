import itertools

import pytest
from hypothesis import given, strategies as st

from roadwatch.querygen import (
    Lexicon,
    QueryGenError,
    SynonymSet,
    expand_pairs,
    load_plan,
    translate_queries,
)

CONTEXT = SynonymSet(terms=("road", "street"), role="context")
SNOW = SynonymSet(terms=("snow", "blizzard"), role="incident")


class TestExpandPairs:
    def test_two_by_two(self):
        queries = expand_pairs(CONTEXT, SNOW, "snow")
        assert [q.text for q in queries] == [
            "road snow",
            "road blizzard",
            "street snow",
            "street blizzard",
        ]
        assert all(q.language == "en" and q.class_id == "snow" for q in queries)
        assert queries[1].origin == ("road", "blizzard")

    def test_singletons(self):
        queries = expand_pairs(
            SynonymSet(("road",), "context"), SynonymSet(("fire",), "incident"), "fire"
        )
        assert [q.text for q in queries] == ["road fire"]

    def test_three_by_four_matches_enumerated_product(self):
        ctx = SynonymSet(("road", "street", "highway"), "context")
        inc = SynonymSet(("flood", "flooding", "inundation", "deluge"), "incident")
        queries = expand_pairs(ctx, inc, "flooding")
        expected = [f"{c} {i}" for c, i in itertools.product(ctx.terms, inc.terms)]
        assert [q.text for q in queries] == expected
        assert len(queries) == 12
        assert len({q.origin for q in queries}) == 12

    def test_empty_set_rejected(self):
        with pytest.raises(QueryGenError):
            SynonymSet(terms=(), role="context")

    def test_duplicate_terms_rejected(self):
        with pytest.raises(QueryGenError):
            SynonymSet(terms=("road", "road"), role="context")

    @given(
        n_ctx=st.integers(min_value=1, max_value=6),
        n_inc=st.integers(min_value=1, max_value=6),
    )
    def test_size_is_product_and_texts_unique(self, n_ctx, n_inc):
        ctx = SynonymSet(tuple(f"c{i}" for i in range(n_ctx)), "context")
        inc = SynonymSet(tuple(f"i{j}" for j in range(n_inc)), "incident")
        queries = expand_pairs(ctx, inc, "snow")
        assert len(queries) == n_ctx * n_inc
        assert len({q.text for q in queries}) == len(queries)


class TestTranslateQueries:
    def test_direct_substitution(self):
        queries = expand_pairs(SynonymSet(("road",), "context"), SynonymSet(("snow",), "incident"), "snow")
        lex = Lexicon(terms={"nl": {"road": "weg", "snow": "sneeuw"}})
        translated, report = translate_queries(queries, lex)
        assert [q.text for q in translated] == ["weg sneeuw"]
        assert translated[0].language == "nl"
        assert translated[0].origin == ("road", "snow")
        assert translated[0].class_id == "snow"
        assert report.translated == 1
        assert report.gaps() == []

    def test_empty_lexicon_rejected(self):
        with pytest.raises(QueryGenError):
            Lexicon(terms={})

    def test_partial_coverage_counts_covered_pairs_only(self):
        ctx = SynonymSet(("road", "street"), "context")
        inc = SynonymSet(("snow", "blizzard"), "incident")
        queries = expand_pairs(ctx, inc, "snow")
        # nl covers everything except "blizzard"; hr covers only "road"+"snow".
        lex = Lexicon(
            terms={
                "nl": {"road": "weg", "street": "straat", "snow": "sneeuw"},
                "hr": {"road": "cesta", "snow": "snijeg"},
            }
        )
        translated, report = translate_queries(queries, lex)
        # covered: nl x {road snow, street snow}, hr x {road snow}
        assert sorted((q.language, q.text) for q in translated) == [
            ("hr", "cesta snijeg"),
            ("nl", "straat sneeuw"),
            ("nl", "weg sneeuw"),
        ]
        assert report.translated == 3
        gaps = report.gaps()
        assert ("nl", "blizzard") in gaps
        assert ("hr", "street") in gaps and ("hr", "blizzard") in gaps

    def test_word_order_override(self):
        queries = expand_pairs(SynonymSet(("road",), "context"), SynonymSet(("snow",), "incident"), "snow")
        lex = Lexicon(
            terms={"fa": {"road": "jadde", "snow": "barf"}}, order={"fa": "incident_first"}
        )
        translated, _ = translate_queries(queries, lex)
        assert translated[0].text == "barf jadde"

    def test_translation_never_emits_english(self):
        queries = expand_pairs(CONTEXT, SNOW, "snow")
        lex = Lexicon(terms={"nl": {"road": "weg", "street": "straat", "snow": "sneeuw",
                                    "blizzard": "sneeuwstorm"}})
        translated, _ = translate_queries(queries, lex)
        assert translated and all(q.language != "en" for q in translated)


class TestPackagedPlan:
    def test_plan_loads_and_expands(self):
        from roadwatch.cli import _DATA_DIR

        plan = load_plan(_DATA_DIR / "queryplan.yaml")
        assert set(plan.class_ids()) == {
            "animal_on_road", "collapse", "fire", "flooding",
            "landslide", "snow", "treefall", "vehicle_crash",
        }
        english = plan.queries_for("snow", languages=("en",))
        assert {q.text for q in english} >= {"road snow", "street blizzard"}
        multi = plan.queries_for("snow", languages=("en", "nl"))
        assert any(q.language == "nl" for q in multi)

    def test_unknown_class_rejected(self):
        from roadwatch.cli import _DATA_DIR

        plan = load_plan(_DATA_DIR / "queryplan.yaml")
        with pytest.raises(QueryGenError):
            plan.queries_for("earthquake")
