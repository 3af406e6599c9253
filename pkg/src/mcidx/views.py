"""Three textual views per section: raw text, keywords, and summary.

The raw-text view is the section text itself. Keyword and summary views come
either from an LLM endpoint or from deterministic extractive fallbacks, so
the whole pipeline (and the test suite) can run offline. Short sections are
their own summary; only sections above the token threshold are sent to the
LLM.
"""

from __future__ import annotations

import enum
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .chunking import split_sentences
from .corpus import Document, Section
from .errors import ParseError, ProviderError, SchemaError
from .jsonio import iter_jsonl, write_jsonl
from .prompts import render_keywords_prompt, render_summary_prompt
from .providers import DEFAULT_MAX_IN_FLIGHT, LlmClient
from .retrieval import DENSE_TOKEN_LIMIT, smoothed_idf
from .text import index_terms, token_count, truncate_tokens

logger = logging.getLogger(__name__)

KEYWORD_SEPARATOR = "; "

# Sections at or under this many tokens are already retrieval-friendly and
# serve as their own summary.
SUMMARY_TOKEN_THRESHOLD = 200
SUMMARY_WORD_BUDGET = 200

LLM_GENERATOR = "llm"
EXTRACTIVE_GENERATOR = "extractive"

STOPWORDS = frozenset("""
a about above after again against all am an and any are aren't as at be because
been before being below between both but by can cannot could couldn't did didn't
do does doesn't doing don't down during each few for from further had hadn't has
hasn't have haven't having he her here hers herself him himself his how i if in
into is isn't it its itself let's me more most mustn't my myself no nor not of
off on once only or other ought our ours ourselves out over own same shan't she
should shouldn't so some such than that the their theirs them themselves then
there these they this those through to too under until up very was wasn't we
were weren't what when where which while who whom why will with won't would
wouldn't you your yours yourself yourselves
""".split())


class ViewKind(enum.Enum):
    RAW_TEXT = "raw"
    KEYWORDS = "keywords"
    SUMMARY = "summary"


class Provenance(enum.Enum):
    IDENTITY = "identity"
    LLM_GENERATED = "llm"
    EXTRACTIVE_FALLBACK = "extractive"


@dataclass(frozen=True)
class ViewEntry:
    section_id: str
    view_kind: ViewKind
    text: str
    provenance: Provenance


def generate_summary(section: Section, llm: LlmClient) -> str:
    """LLM summary for long sections; short sections are returned unchanged."""
    if section.token_count <= SUMMARY_TOKEN_THRESHOLD:
        return section.text
    return llm.generate(render_summary_prompt(section.heading, section.text), max_tokens=512)


def _parse_keyword_list(raw: str) -> list[str]:
    start = raw.find("[")
    end = raw.rfind("]")
    if start < 0 or end <= start:
        raise ParseError("keyword output contains no [...] list")
    inner = raw[start + 1:end]
    # Accept either a JSON array or a bare comma-separated list.
    try:
        parsed = json.loads(raw[start:end + 1])
        items = [str(x) for x in parsed] if isinstance(parsed, list) else []
    except ValueError:
        items = inner.split(",")
    keywords: list[str] = []
    seen: set[str] = set()
    for item in items:
        term = item.strip().strip("\"'")
        if not term or term.casefold() in seen:
            continue
        seen.add(term.casefold())
        keywords.append(term)
    return keywords


def generate_keywords(section: Section, llm: LlmClient) -> list[str]:
    """LLM keyword list, deduplicated case-insensitively, order preserved."""
    raw = llm.generate(render_keywords_prompt(section.heading, section.text), max_tokens=512)
    return _parse_keyword_list(raw)


def extractive_summary(section: Section) -> str:
    """Leading sentences up to the word budget; always at least one sentence."""
    sentences = split_sentences(section.text)
    if not sentences:
        return ""
    total = 0
    end = sentences[0][1][1]
    for i, (sentence_text, span) in enumerate(sentences):
        words = token_count(sentence_text)
        if i and total + words > SUMMARY_WORD_BUDGET:
            break
        total += words
        end = span[1]
    return section.text[:end].rstrip()


def extractive_keywords(
    section: Section,
    doc: Document,
    n: int = 20,
    stopwords: frozenset[str] = STOPWORDS,
) -> list[str]:
    """Top-n section terms by TF-IDF over the document's sections.

    Uses the same smoothed idf as the sparse retriever; ties break by first
    occurrence in the section.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    n_sections = len(doc.sections)
    df: dict[str, int] = {}
    for other in doc.sections:
        for term in set(index_terms(other.text)):
            df[term] = df.get(term, 0) + 1
    counts: dict[str, int] = {}
    first_pos: dict[str, int] = {}
    for pos, term in enumerate(index_terms(section.text)):
        if term in stopwords:
            continue
        counts[term] = counts.get(term, 0) + 1
        first_pos.setdefault(term, pos)
    scored = sorted(
        counts,
        key=lambda t: (-counts[t] * smoothed_idf(df[t], n_sections), first_pos[t]),
    )
    return scored[:n]


def _llm_views_for_section(section: Section, llm: LlmClient) -> list[ViewEntry]:
    try:
        keywords = generate_keywords(section, llm)
        summary = generate_summary(section, llm)
    except ProviderError as exc:
        raise ProviderError(f"section {section.section_id!r}: {exc}") from exc
    except ParseError as exc:
        raise ParseError(f"section {section.section_id!r}: {exc}") from exc
    summary_provenance = (
        Provenance.LLM_GENERATED
        if section.token_count > SUMMARY_TOKEN_THRESHOLD
        else Provenance.IDENTITY
    )
    truncated = truncate_tokens(summary, DENSE_TOKEN_LIMIT)
    if truncated != summary:
        logger.warning(
            "summary for section %s truncated from %d to %d tokens before indexing",
            section.section_id, token_count(summary), DENSE_TOKEN_LIMIT,
        )
    return [
        ViewEntry(section.section_id, ViewKind.RAW_TEXT, section.text, Provenance.IDENTITY),
        ViewEntry(section.section_id, ViewKind.KEYWORDS, KEYWORD_SEPARATOR.join(keywords), Provenance.LLM_GENERATED),
        ViewEntry(section.section_id, ViewKind.SUMMARY, truncated, summary_provenance),
    ]


def _extractive_views_for_section(section: Section, doc: Document) -> list[ViewEntry]:
    keywords = extractive_keywords(section, doc)
    return [
        ViewEntry(section.section_id, ViewKind.RAW_TEXT, section.text, Provenance.IDENTITY),
        ViewEntry(section.section_id, ViewKind.KEYWORDS, KEYWORD_SEPARATOR.join(keywords), Provenance.EXTRACTIVE_FALLBACK),
        ViewEntry(section.section_id, ViewKind.SUMMARY, extractive_summary(section), Provenance.EXTRACTIVE_FALLBACK),
    ]


def build_views(
    doc: Document,
    generator: str = EXTRACTIVE_GENERATOR,
    llm: LlmClient | None = None,
    jobs: int = DEFAULT_MAX_IN_FLIGHT,
) -> list[ViewEntry]:
    """Emit exactly three ViewEntries per section, in section order.

    LLM calls run in parallel across sections (bounded by ``jobs``) but the
    returned order is always the document's section order.
    """
    if generator == EXTRACTIVE_GENERATOR:
        per_section = [_extractive_views_for_section(s, doc) for s in doc.sections]
    elif generator == LLM_GENERATOR:
        if llm is None:
            raise ValueError("generator 'llm' requires an LlmClient")
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            per_section = list(pool.map(lambda s: _llm_views_for_section(s, llm), doc.sections))
    else:
        raise ValueError(f"unknown view generator {generator!r}")
    return [entry for entries in per_section for entry in entries]


def view_texts(views: list[ViewEntry], kind: ViewKind) -> list[tuple[str, str]]:
    """(section_id, text) pairs for one view kind, in input order."""
    return [(v.section_id, v.text) for v in views if v.view_kind is kind]


def write_views_jsonl(views_by_doc: dict[str, list[ViewEntry]], path: str | Path) -> None:
    write_jsonl(
        path,
        (
            {
                "doc_id": doc_id,
                "section_id": v.section_id,
                "view_kind": v.view_kind.value,
                "text": v.text,
                "provenance": v.provenance.value,
            }
            for doc_id, entries in views_by_doc.items()
            for v in entries
        ),
    )


def read_views_jsonl(path: str | Path) -> dict[str, list[ViewEntry]]:
    views_by_doc: dict[str, list[ViewEntry]] = {}
    for lineno, record in iter_jsonl(path):
        try:
            entry = ViewEntry(
                section_id=record["section_id"],
                view_kind=ViewKind(record["view_kind"]),
                text=record["text"],
                provenance=Provenance(record["provenance"]),
            )
            doc_id = record["doc_id"]
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"bad view record: {exc}", line=lineno) from exc
        views_by_doc.setdefault(doc_id, []).append(entry)
    return views_by_doc
