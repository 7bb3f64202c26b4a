"""Search-query planning: pairwise synonym-set expansion and term-level
translation into additional query languages.

A query is always built from one *context* term (e.g. "road") and one
*incident* term (e.g. "blizzard"). Expansion takes the Cartesian product of
the two synonym sets; translation substitutes each term via a per-language
lexicon and recombines, so partial lexicons simply yield fewer queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .taxonomy import CANONICAL_CLASS_IDS

QUERY_LANGUAGES = ("en", "nl", "hr", "fa", "zh", "sk")


class QueryGenError(ValueError):
    pass


@dataclass(frozen=True)
class SynonymSet:
    """An ordered set of interchangeable keywords for one slot of a query."""

    terms: tuple[str, ...]
    role: str  # "context" | "incident"

    def __post_init__(self):
        if not self.terms:
            raise QueryGenError(f"empty synonym set for role {self.role!r}")
        if len(set(self.terms)) != len(self.terms):
            raise QueryGenError(f"duplicate terms in synonym set {self.terms!r}")
        if self.role not in ("context", "incident"):
            raise QueryGenError(f"unknown synonym role {self.role!r}")


@dataclass(frozen=True)
class QuerySpec:
    """One concrete search query with its provenance.

    ``origin`` keeps the (context term, incident term) pair in English so a
    translated query can always be traced back to the pair it came from.
    """

    text: str
    language: str
    class_id: str
    origin: tuple[str, str]

    def __post_init__(self):
        if self.language not in QUERY_LANGUAGES:
            raise QueryGenError(f"unknown query language {self.language!r}")
        if self.class_id not in CANONICAL_CLASS_IDS:
            raise QueryGenError(f"unknown class id {self.class_id!r}")


@dataclass
class Lexicon:
    """Per-language term maps used for query translation.

    ``terms[lang][english_term] -> translated_term``. ``order[lang]`` may be
    ``"incident_first"`` to flip word order for languages where the English
    context-first order reads wrong; default is context-first.
    """

    terms: dict[str, dict[str, str]]
    order: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.terms or not any(self.terms.values()):
            raise QueryGenError("empty lexicon")
        for lang in self.terms:
            if lang not in QUERY_LANGUAGES or lang == "en":
                raise QueryGenError(f"lexicon language must be a non-English target, got {lang!r}")

    def languages(self) -> tuple[str, ...]:
        return tuple(sorted(self.terms))

    def translate(self, lang: str, term: str) -> str | None:
        return self.terms.get(lang, {}).get(term)


@dataclass
class TranslationReport:
    """Coverage accounting for a translation run."""

    translated: int = 0
    skipped: list[tuple[str, str, str]] = field(default_factory=list)  # (lang, term, query text)

    def gaps(self) -> list[tuple[str, str]]:
        return sorted({(lang, term) for lang, term, _ in self.skipped})


def expand_pairs(context: SynonymSet, incident: SynonymSet, class_id: str) -> list[QuerySpec]:
    """Combine two synonym sets pairwise into English queries.

    Returns |context| x |incident| queries in context-major order, each
    recording its origin pair. E.g. {road, street} x {snow, blizzard} gives
    "road snow", "road blizzard", "street snow", "street blizzard".
    """
    if context.role != "context" or incident.role != "incident":
        raise QueryGenError("expand_pairs needs one context set and one incident set")
    queries = []
    for c_term in context.terms:
        for i_term in incident.terms:
            queries.append(
                QuerySpec(
                    text=f"{c_term} {i_term}",
                    language="en",
                    class_id=class_id,
                    origin=(c_term, i_term),
                )
            )
    return queries


def translate_queries(
    queries: list[QuerySpec], lexicon: Lexicon
) -> tuple[list[QuerySpec], TranslationReport]:
    """Translate English queries term-by-term into every lexicon language.

    Produces one query per (input query, language) whose terms are both
    covered; pairs with a missing term are skipped and listed in the report.
    Translation preserves class_id and the English origin pair.
    """
    report = TranslationReport()
    out: list[QuerySpec] = []
    for query in queries:
        if query.language != "en":
            raise QueryGenError("translate_queries expects English source queries")
        c_term, i_term = query.origin
        for lang in lexicon.languages():
            t_context = lexicon.translate(lang, c_term)
            t_incident = lexicon.translate(lang, i_term)
            missing = [t for t, v in ((c_term, t_context), (i_term, t_incident)) if v is None]
            if missing:
                for term in missing:
                    report.skipped.append((lang, term, query.text))
                continue
            if lexicon.order.get(lang) == "incident_first":
                text = f"{t_incident} {t_context}"
            else:
                text = f"{t_context} {t_incident}"
            out.append(
                QuerySpec(text=text, language=lang, class_id=query.class_id, origin=query.origin)
            )
            report.translated += 1
    return out, report


@dataclass
class QueryPlan:
    """A full harvesting plan: per-class synonym sets plus a lexicon."""

    context_sets: dict[str, SynonymSet]
    incident_sets: dict[str, SynonymSet]
    lexicon: Lexicon | None = None

    def class_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.incident_sets))

    def queries_for(self, class_id: str, languages: tuple[str, ...] = ("en",)) -> list[QuerySpec]:
        if class_id not in self.incident_sets:
            raise QueryGenError(f"no incident synonym set for class {class_id!r}")
        context = self.context_sets.get(class_id) or self.context_sets.get("default")
        if context is None:
            raise QueryGenError("plan has no context synonym set")
        english = expand_pairs(context, self.incident_sets[class_id], class_id)
        out = [q for q in english if "en" in languages]
        targets = tuple(l for l in languages if l != "en")
        if targets:
            if self.lexicon is None:
                raise QueryGenError("plan has no lexicon; cannot emit non-English queries")
            scoped = Lexicon(
                terms={l: self.lexicon.terms[l] for l in targets if l in self.lexicon.terms},
                order=self.lexicon.order,
            )
            translated, _ = translate_queries(english, scoped)
            out.extend(translated)
        return out


def load_plan(path: str | Path) -> QueryPlan:
    """Load a query plan document (YAML) with optional lexicon file reference."""
    path = Path(path)
    doc = yaml.safe_load(path.read_text())
    context_sets = {}
    for cid, terms in doc.get("context", {}).items():
        context_sets[cid] = SynonymSet(terms=tuple(terms), role="context")
    incident_sets = {}
    for cid, terms in doc.get("incidents", {}).items():
        incident_sets[cid] = SynonymSet(terms=tuple(terms), role="incident")
    lexicon = None
    lex_ref = doc.get("lexicon")
    if isinstance(lex_ref, str):
        lexicon = load_lexicon(path.parent / lex_ref)
    elif isinstance(lex_ref, dict):
        lexicon = Lexicon(terms=lex_ref.get("terms", lex_ref), order=lex_ref.get("order", {}))
    return QueryPlan(context_sets=context_sets, incident_sets=incident_sets, lexicon=lexicon)


def load_lexicon(path: str | Path) -> Lexicon:
    doc = yaml.safe_load(Path(path).read_text())
    return Lexicon(terms=doc.get("terms", {}), order=doc.get("order", {}))
