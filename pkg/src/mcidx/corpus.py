"""Document and QA data model, structured-document ingestion, and filtering.

Documents are flat ordered lists of sections. A section is the smallest
heading-delimited division of the source text; its ``doc_span`` addresses the
document ``full_text``, which is the section texts joined with a single
newline. Questions carry an answer scope as a character span inside exactly
one section.
"""

from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .errors import DuplicateId, EmptyDocument, ParseError, SchemaError
from .jsonio import iter_json_objects, iter_jsonl, write_jsonl
from .prompts import render_question_prompt
from .text import token_count

logger = logging.getLogger(__name__)

SECTION_SEPARATOR = "\n"

# Reference-style sections dropped at ingestion to reduce retrieval noise.
DEFAULT_EXCLUDED_HEADINGS = frozenset({"see also", "notes", "references", "external links"})

PREAMBLE_HEADING = "(preamble)"

_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*\S)\s*$")

MIN_DOC_TOKENS = 10_000


@dataclass(frozen=True)
class Section:
    """One smallest division of a document."""

    section_id: str
    heading: str
    level: int
    text: str
    doc_span: tuple[int, int]
    token_count: int


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    sections: tuple[Section, ...]
    full_text: str

    @cached_property
    def sections_by_id(self) -> dict[str, Section]:
        return {s.section_id: s for s in self.sections}

    def section(self, section_id: str) -> Section:
        return self.sections_by_id[section_id]


class QuestionType(enum.Enum):
    NARRATIVE_PLOT = "NarrativePlot"
    SUMMARIZATION = "Summarization"
    INFERENTIAL_IMPLIED = "InferentialImplied"
    INFORMATION_SYNTHESIS = "InformationSynthesis"
    CAUSE_EFFECT = "CauseEffect"
    COMPARATIVE = "Comparative"
    EXPLANATORY = "Explanatory"
    THEMES_MOTIFS = "ThemesMotifs"


def _normalize_type_key(name: str) -> str:
    return "".join(ch for ch in name.lower() if ch.isalnum())


_TYPE_ALIASES: dict[str, QuestionType] = {}
for _qt, _aliases in {
    QuestionType.NARRATIVE_PLOT: ("questions about narrative and plot details", "narrative and plot details", "narrative plot"),
    QuestionType.SUMMARIZATION: ("summarization questions", "summarization"),
    QuestionType.INFERENTIAL_IMPLIED: ("inferential and implied questions", "inferential and implied", "inferential implied"),
    QuestionType.INFORMATION_SYNTHESIS: ("questions requiring synthesis of information", "synthesis of information", "information synthesis"),
    QuestionType.CAUSE_EFFECT: ("cause and effect questions", "cause and effect", "cause effect"),
    QuestionType.COMPARATIVE: ("comparative questions", "comparative"),
    QuestionType.EXPLANATORY: ("explanatory questions", "explanatory"),
    QuestionType.THEMES_MOTIFS: ("questions about themes and motifs", "themes and motifs", "themes motifs"),
}.items():
    _TYPE_ALIASES[_normalize_type_key(_qt.value)] = _qt
    for _a in _aliases:
        _TYPE_ALIASES[_normalize_type_key(_a)] = _qt


def parse_question_type(name: str) -> QuestionType:
    """Map a type label (canonical or generation-prompt phrasing) to the enum."""
    key = _normalize_type_key(name)
    if key not in _TYPE_ALIASES:
        raise ValueError(f"unknown question type: {name!r}")
    return _TYPE_ALIASES[key]


@dataclass(frozen=True)
class QAItem:
    question_id: str
    doc_id: str
    question: str
    answer: str
    question_type: QuestionType
    scope_section_id: str
    scope_span: tuple[int, int]


@dataclass(frozen=True)
class CorpusStats:
    n_documents: int
    n_questions: int
    mean_sections_per_doc: float
    mean_tokens_per_doc: float
    mean_tokens_per_section: float
    mean_tokens_per_answer_scope: float

    def to_dict(self) -> dict:
        return {
            "n_documents": self.n_documents,
            "n_questions": self.n_questions,
            "mean_sections_per_doc": self.mean_sections_per_doc,
            "mean_tokens_per_doc": self.mean_tokens_per_doc,
            "mean_tokens_per_section": self.mean_tokens_per_section,
            "mean_tokens_per_answer_scope": self.mean_tokens_per_answer_scope,
        }


def build_document(
    doc_id: str,
    title: str,
    sections: list[tuple[str, str, int, str]],
) -> Document:
    """Assemble a Document from ``(section_id, heading, level, text)`` tuples.

    Computes ``full_text`` and the section spans so that every section text
    is exactly ``full_text[span]`` and spans cover ``full_text`` with single
    newline separators between them.
    """
    if not sections:
        raise EmptyDocument(f"document {doc_id!r} has no sections")
    built: list[Section] = []
    pos = 0
    pieces: list[str] = []
    seen_ids: set[str] = set()
    for i, (section_id, heading, level, text) in enumerate(sections):
        if section_id in seen_ids:
            raise DuplicateId(f"section id {section_id!r} repeated in document {doc_id!r}")
        seen_ids.add(section_id)
        if i:
            pos += len(SECTION_SEPARATOR)
        span = (pos, pos + len(text))
        built.append(Section(section_id, heading, level, text, span, token_count(text)))
        pieces.append(text)
        pos = span[1]
    return Document(doc_id, title, tuple(built), SECTION_SEPARATOR.join(pieces))


def parse_markdown(
    text: str,
    doc_id: str,
    title: str | None = None,
    excluded_headings: frozenset[str] = DEFAULT_EXCLUDED_HEADINGS,
) -> Document:
    """Split markdown into flat sections at headings of any level.

    A heading line (1-6 ``#`` then whitespace) opens a new section whose text
    runs until the next heading; a heading therefore contributes only its own
    preamble, never the text of nested subheadings. Text before the first
    heading becomes a level-0 section. Headings matching ``excluded_headings``
    (case-insensitive) are dropped together with their body, and sections
    whose body is blank are dropped entirely.
    """
    blocks: list[tuple[str, int, list[str]]] = [(PREAMBLE_HEADING, 0, [])]
    for line in text.splitlines():
        match = _HEADING_RE.match(line)
        if match:
            blocks.append((match.group(2), len(match.group(1)), []))
        else:
            blocks[-1][2].append(line)

    sections: list[tuple[str, str, int, str]] = []
    for heading, level, lines in blocks:
        if heading.casefold() in excluded_headings:
            continue
        body = "\n".join(lines).strip()
        if not body:
            continue
        sections.append((f"s{len(sections):04d}", heading, level, body))
    if not sections:
        raise EmptyDocument(f"no content survived heading exclusion for {doc_id!r}")
    return build_document(doc_id, title if title is not None else doc_id, sections)


def render_markdown(doc: Document) -> str:
    """Inverse of parse_markdown for the normalized flat form."""
    parts = []
    for section in doc.sections:
        if section.level <= 0:
            parts.append(section.text)
        else:
            parts.append(f"{'#' * min(section.level, 6)} {section.heading}\n{section.text}")
    return "\n".join(parts)


def _require(record: dict, key: str, kind: type, lineno: int):
    if key not in record:
        raise SchemaError(f"missing key {key!r}", line=lineno)
    value = record[key]
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"key {key!r} must be an integer", line=lineno)
    elif not isinstance(value, kind):
        raise SchemaError(f"key {key!r} must be {kind.__name__}", line=lineno)
    return value


def load_corpus_jsonl(path: str | Path) -> list[Document]:
    """Load documents from corpus JSONL, recomputing spans from section texts."""
    docs: list[Document] = []
    seen: set[str] = set()
    for lineno, record in iter_jsonl(path):
        doc_id = _require(record, "doc_id", str, lineno)
        title = _require(record, "title", str, lineno)
        raw_sections = _require(record, "sections", list, lineno)
        if not raw_sections:
            raise SchemaError("document has no sections", line=lineno)
        sections = []
        for raw in raw_sections:
            if not isinstance(raw, dict):
                raise SchemaError("section entry is not an object", line=lineno)
            sections.append(
                (
                    _require(raw, "section_id", str, lineno),
                    _require(raw, "heading", str, lineno),
                    _require(raw, "level", int, lineno),
                    _require(raw, "text", str, lineno),
                )
            )
        if doc_id in seen:
            raise DuplicateId(doc_id)
        seen.add(doc_id)
        docs.append(build_document(doc_id, title, sections))
    return docs


def write_corpus_jsonl(docs: list[Document], path: str | Path) -> None:
    write_jsonl(
        path,
        (
            {
                "doc_id": d.doc_id,
                "title": d.title,
                "sections": [
                    {"section_id": s.section_id, "heading": s.heading, "level": s.level, "text": s.text}
                    for s in d.sections
                ],
            }
            for d in docs
        ),
    )


def filter_long_docs(docs: list[Document], min_tokens: int = MIN_DOC_TOKENS, count_tokens=token_count) -> list[Document]:
    """Keep documents with at least ``min_tokens`` tokens, preserving order.

    ``count_tokens`` is a hook for alternative tokenizers; the whitespace
    default is normative.
    """
    return [d for d in docs if count_tokens(d.full_text) >= min_tokens]


def load_qa_jsonl(path: str | Path) -> list[QAItem]:
    """Load QA items without cross-checking them against a corpus."""
    items: list[QAItem] = []
    for lineno, record in iter_jsonl(path):
        scope = _require(record, "scope", dict, lineno)
        try:
            qtype = parse_question_type(_require(record, "question_type", str, lineno))
        except ValueError as exc:
            raise SchemaError(str(exc), line=lineno) from exc
        items.append(
            QAItem(
                question_id=_require(record, "question_id", str, lineno),
                doc_id=_require(record, "doc_id", str, lineno),
                question=_require(record, "question", str, lineno),
                answer=_require(record, "answer", str, lineno),
                question_type=qtype,
                scope_section_id=_require(scope, "section_id", str, lineno),
                scope_span=(
                    _require(scope, "char_start", int, lineno),
                    _require(scope, "char_end", int, lineno),
                ),
            )
        )
    return items


def load_and_filter_qa(path: str | Path, docs: list[Document]) -> list[QAItem]:
    """Load QA JSONL and drop items whose scope cannot be resolved.

    Dropped (with a warning): unknown doc_id, unknown section_id, and scope
    spans that are empty or fall outside the section text.
    """
    docs_by_id = {d.doc_id: d for d in docs}
    kept: list[QAItem] = []
    for item in load_qa_jsonl(path):
        doc = docs_by_id.get(item.doc_id)
        if doc is None:
            logger.warning("dropping %s: unknown doc_id %r", item.question_id, item.doc_id)
            continue
        section = doc.sections_by_id.get(item.scope_section_id)
        if section is None:
            logger.warning("dropping %s: unknown section %r", item.question_id, item.scope_section_id)
            continue
        start, end = item.scope_span
        if not (0 <= start < end <= len(section.text)):
            logger.warning(
                "dropping %s: scope (%d, %d) outside section of length %d",
                item.question_id, start, end, len(section.text),
            )
            continue
        kept.append(item)
    return kept


def write_qa_jsonl(items: list[QAItem], path: str | Path) -> None:
    write_jsonl(
        path,
        (
            {
                "question_id": q.question_id,
                "doc_id": q.doc_id,
                "question": q.question,
                "answer": q.answer,
                "question_type": q.question_type.value,
                "scope": {
                    "section_id": q.scope_section_id,
                    "char_start": q.scope_span[0],
                    "char_end": q.scope_span[1],
                },
            }
            for q in items
        ),
    )


def generate_questions(section: Section, llm, doc_id: str) -> list[QAItem]:
    """Ask the LLM for three questions over a section and locate their scopes.

    Each returned record must quote its supporting context verbatim; records
    whose context is not found in the section text (or whose type label is
    unrecognized) are discarded.
    """
    raw = llm.generate(render_question_prompt(section.text), max_tokens=2048)
    records = [
        obj
        for obj in iter_json_objects(raw)
        if all(isinstance(obj.get(k), str) for k in ("question", "type", "answer", "answer_context"))
    ]
    if not records:
        raise ParseError(f"no question records parsed from output for section {section.section_id!r}")
    items: list[QAItem] = []
    for record in records:
        context = record["answer_context"]
        start = section.text.find(context) if context else -1
        if start < 0:
            logger.warning(
                "discarding generated question for %s: answer context not found verbatim",
                section.section_id,
            )
            continue
        try:
            qtype = parse_question_type(record["type"])
        except ValueError:
            logger.warning("discarding generated question for %s: %r", section.section_id, record["type"])
            continue
        items.append(
            QAItem(
                question_id=f"{doc_id}:{section.section_id}:q{len(items)}",
                doc_id=doc_id,
                question=record["question"],
                answer=record["answer"],
                question_type=qtype,
                scope_section_id=section.section_id,
                scope_span=(start, start + len(context)),
            )
        )
    return items


def corpus_stats(docs: list[Document], qa_items: list[QAItem]) -> CorpusStats:
    """Arithmetic means over the corpus; empty inputs yield zeros."""
    docs_by_id = {d.doc_id: d for d in docs}
    n_docs = len(docs)
    n_sections = sum(len(d.sections) for d in docs)
    scope_tokens = []
    for item in qa_items:
        doc = docs_by_id.get(item.doc_id)
        section = doc.sections_by_id.get(item.scope_section_id) if doc else None
        if section is None:
            continue
        start, end = item.scope_span
        scope_tokens.append(token_count(section.text[start:end]))

    def mean(values) -> float:
        values = list(values)
        return sum(values) / len(values) if values else 0.0

    return CorpusStats(
        n_documents=n_docs,
        n_questions=len(qa_items),
        mean_sections_per_doc=mean(len(d.sections) for d in docs),
        mean_tokens_per_doc=mean(token_count(d.full_text) for d in docs),
        mean_tokens_per_section=mean(s.token_count for d in docs for s in d.sections),
        mean_tokens_per_answer_scope=mean(scope_tokens),
    )
