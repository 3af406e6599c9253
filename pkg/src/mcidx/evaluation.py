"""Answer-scope recall, the evaluation grid, and pairwise answer judging.

Recall of a question is the fraction of its answer scope's characters
covered by the union of retrieved spans. Evaluation scores each question
only against its own document's chunks, so indexes are built per document.
Pairwise judging scores two candidate answers in two position-swapped
rounds; the score-based winner has the higher score total, the round-based
winner must win both rounds outright.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

from .chunking import ChunkScheme, chunk_document, scope_doc_span
from .corpus import Document, QAItem
from .errors import EmptyRetrieval, EmptyScope, ParseError, ProviderMismatch, UnknownDoc
from .fusion import retrieve_mc, retrieve_single
from .jsonio import iter_json_objects
from .prompts import render_answer_prompt, render_judge_prompt
from .providers import EmbeddingProvider, LlmClient
from .retrieval import (
    B_DEFAULT,
    DENSE,
    K1_DEFAULT,
    build_dense_index,
    build_sparse_index,
    parse_retriever,
    resolve_provider,
)
from .views import EXTRACTIVE_GENERATOR, ViewEntry, ViewKind, build_views, view_texts

logger = logging.getLogger(__name__)

MODE_MC = "mc"
MODE_SINGLE = "single"

_SINGLE_VIEWS = {
    "raw": ViewKind.RAW_TEXT,
    "keywords": ViewKind.KEYWORDS,
    "summary": ViewKind.SUMMARY,
}


def parse_mode(spec: str) -> tuple[str, ViewKind | None]:
    """Parse ``mc | single:<raw|keywords|summary>``."""
    if spec == MODE_MC:
        return MODE_MC, None
    kind, sep, view = spec.partition(":")
    if kind == MODE_SINGLE and sep and view in _SINGLE_VIEWS:
        return MODE_SINGLE, _SINGLE_VIEWS[view]
    raise ValueError(f"unknown mode spec {spec!r}")


def format_mode(kind: str, view: ViewKind | None = None) -> str:
    if kind == MODE_MC:
        return MODE_MC
    return f"{MODE_SINGLE}:{view.value}"


def format_k(k: float) -> str:
    return str(int(k)) if float(k).is_integer() else str(k)


@dataclass(frozen=True)
class RecallRow:
    scheme: str
    retriever: str
    mode: str
    k: float
    n_questions: int
    mean_recall: float
    per_question: tuple[float, ...]


@dataclass(frozen=True)
class RecallReport:
    rows: tuple[RecallRow, ...]

    @classmethod
    def merge(cls, reports: list["RecallReport"]) -> "RecallReport":
        return cls(tuple(row for report in reports for row in report.rows))

    def to_csv(self) -> str:
        lines = ["scheme,retriever,mode,k,n,mean_recall"]
        for row in self.rows:
            lines.append(
                f"{row.scheme},{row.retriever},{row.mode},{format_k(row.k)},"
                f"{row.n_questions},{row.mean_recall:.6f}"
            )
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        """Recall (%) pivoted with one column per budget k."""
        ks = sorted({row.k for row in self.rows})
        groups: dict[tuple[str, str, str], dict[float, float]] = {}
        for row in self.rows:
            groups.setdefault((row.scheme, row.retriever, row.mode), {})[row.k] = row.mean_recall
        header = "| scheme | retriever | mode | " + " | ".join(f"k={format_k(k)}" for k in ks) + " |"
        sep = "|" + "---|" * (3 + len(ks))
        lines = [header, sep]
        for (scheme, retriever, mode), by_k in groups.items():
            cells = [f"{100 * by_k[k]:.1f}" if k in by_k else "-" for k in ks]
            lines.append(f"| {scheme} | {retriever} | {mode} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"


def _docs_by_id(docs) -> dict[str, Document]:
    if isinstance(docs, dict):
        return docs
    return {d.doc_id: d for d in docs}


def _as_span(unit) -> tuple[int, int]:
    if hasattr(unit, "doc_span"):
        return unit.doc_span
    start, end = unit
    return (start, end)


def recall_of_set(retrieved, qa: QAItem, docs) -> float:
    """Character-level coverage of the answer scope by retrieved spans.

    ``retrieved`` holds chunks/sections or bare ``(start, end)`` document
    spans. Overlapping retrieved spans are unioned before measuring, so
    nothing is double counted; for disjoint spans this equals the sum of
    per-span overlaps.
    """
    by_id = _docs_by_id(docs)
    doc = by_id.get(qa.doc_id)
    if doc is None:
        raise UnknownDoc(f"question {qa.question_id!r} references unknown document {qa.doc_id!r}")
    scope_start, scope_end = scope_doc_span(doc, qa)
    if scope_end <= scope_start:
        raise EmptyScope(f"question {qa.question_id!r} has a zero-length scope")
    spans = sorted(_as_span(u) for u in retrieved)
    covered = 0
    merged_start: int | None = None
    merged_end = 0
    for start, end in spans:
        if merged_start is None or start > merged_end:
            if merged_start is not None:
                covered += max(0, min(merged_end, scope_end) - max(merged_start, scope_start))
            merged_start, merged_end = start, end
        else:
            merged_end = max(merged_end, end)
    if merged_start is not None:
        covered += max(0, min(merged_end, scope_end) - max(merged_start, scope_start))
    return covered / (scope_end - scope_start)


@dataclass
class DocRetrievalContext:
    """Per-document retrieval state for one (scheme, mode, retriever) setup."""

    index: object | None
    view_indexes: dict[ViewKind, object] | None
    span_by_unit: dict[str, tuple[int, int]]
    text_by_unit: dict[str, str]


def _resolve_retrieval(retriever: str, provider: EmbeddingProvider | None):
    kind, provider_name = parse_retriever(retriever)
    if kind != DENSE:
        return kind, None
    if provider is None:
        provider = resolve_provider(provider_name)
    elif provider.name != provider_name:
        raise ProviderMismatch(
            f"retriever spec names provider {provider_name!r} but client is {provider.name!r}"
        )
    return kind, provider


def build_doc_context(
    doc: Document,
    scheme: ChunkScheme,
    mode: str,
    retriever_kind: str,
    provider: EmbeddingProvider | None,
    doc_views: list[ViewEntry] | None,
) -> DocRetrievalContext:
    mode_kind, view = parse_mode(mode)

    def make_index(units):
        if retriever_kind == DENSE:
            return build_dense_index(units, provider)
        return build_sparse_index(units, retriever_kind)

    section_spans = {s.section_id: s.doc_span for s in doc.sections}
    section_texts = {s.section_id: s.text for s in doc.sections}

    if mode_kind == MODE_MC:
        view_indexes = {
            kind: make_index(view_texts(doc_views, kind))
            for kind in (ViewKind.RAW_TEXT, ViewKind.KEYWORDS, ViewKind.SUMMARY)
        }
        return DocRetrievalContext(None, view_indexes, section_spans, section_texts)

    if view in (ViewKind.KEYWORDS, ViewKind.SUMMARY):
        index = make_index(view_texts(doc_views, view))
        return DocRetrievalContext(index, None, section_spans, section_texts)

    chunks = chunk_document(doc, scheme)
    units = [(c.chunk_id, c.text) for c in chunks]
    return DocRetrievalContext(
        make_index(units),
        None,
        {c.chunk_id: c.doc_span for c in chunks},
        {c.chunk_id: c.text for c in chunks},
    )


def retrieve_unit_ids(
    ctx: DocRetrievalContext,
    question: str,
    k: float,
    ordinal: int,
    provider: EmbeddingProvider | None,
    k1: float = K1_DEFAULT,
    b: float = B_DEFAULT,
) -> list[str]:
    if ctx.view_indexes is not None:
        fused = retrieve_mc(ctx.view_indexes, question, k, ordinal, provider, k1=k1, b=b)
        return fused.unit_ids
    scored = retrieve_single(ctx.index, question, k, ordinal, provider, k1=k1, b=b)
    return [s.unit_id for s in scored]


def eval_recall(
    docs,
    qa: list[QAItem],
    scheme: ChunkScheme | str,
    retriever: str,
    mode: str,
    ks: list[float],
    *,
    views: dict[str, list[ViewEntry]] | None = None,
    generator: str = EXTRACTIVE_GENERATOR,
    llm: LlmClient | None = None,
    provider: EmbeddingProvider | None = None,
    invert_parity: bool = False,
    k1: float = K1_DEFAULT,
    b: float = B_DEFAULT,
) -> RecallReport:
    """Mean recall per budget k for one (scheme, retriever, mode) setup.

    Indexes are built per document, questions keep their dataset-order
    ordinal for budget alternation, and questions whose document is absent
    are skipped with a warning. Views are built on demand (with the given
    generator) when the mode needs them and none are supplied.
    """
    if isinstance(scheme, str):
        scheme = ChunkScheme.parse(scheme)
    mode_kind, view = parse_mode(mode)
    needs_views = mode_kind == MODE_MC or view in (ViewKind.KEYWORDS, ViewKind.SUMMARY)
    if needs_views and scheme.kind != "content":
        raise ValueError(f"mode {mode!r} requires the content scheme, got {scheme.spec()!r}")
    retriever_kind, resolved_provider = _resolve_retrieval(retriever, provider)
    by_id = _docs_by_id(docs)

    contexts: dict[str, DocRetrievalContext] = {}

    def context_for(doc: Document) -> DocRetrievalContext:
        if doc.doc_id not in contexts:
            doc_views = None
            if needs_views:
                if views is not None:
                    doc_views = views.get(doc.doc_id)
                    if doc_views is None:
                        raise UnknownDoc(f"no views supplied for document {doc.doc_id!r}")
                else:
                    doc_views = build_views(doc, generator=generator, llm=llm)
            contexts[doc.doc_id] = build_doc_context(
                doc, scheme, mode, retriever_kind, resolved_provider, doc_views
            )
        return contexts[doc.doc_id]

    per_k: dict[float, list[float]] = {float(k): [] for k in ks}
    for position, item in enumerate(qa):
        doc = by_id.get(item.doc_id)
        if doc is None:
            logger.warning("skipping %s: document %r not ingested", item.question_id, item.doc_id)
            continue
        ctx = context_for(doc)
        ordinal = position + 1 if invert_parity else position
        for k in ks:
            unit_ids = retrieve_unit_ids(ctx, item.question, k, ordinal, resolved_provider, k1=k1, b=b)
            spans = [ctx.span_by_unit[uid] for uid in unit_ids]
            per_k[float(k)].append(recall_of_set(spans, item, by_id))

    rows = []
    for k in ks:
        recalls = per_k[float(k)]
        mean = sum(recalls) / len(recalls) if recalls else 0.0
        rows.append(
            RecallRow(
                scheme=scheme.spec(),
                retriever=retriever,
                mode=mode,
                k=float(k),
                n_questions=len(recalls),
                mean_recall=mean,
                per_question=tuple(recalls),
            )
        )
    return RecallReport(tuple(rows))


def generate_answer(question: str, retrieved_texts: list[str], llm: LlmClient) -> str:
    """Answer from the retrieved raw texts only, concatenated in rank order."""
    texts = list(retrieved_texts)
    if not texts:
        raise EmptyRetrieval("cannot generate an answer from zero retrieved texts")
    return llm.generate(render_answer_prompt("\n\n".join(texts), question), max_tokens=512)


class Winner(enum.Enum):
    A = "a"
    B = "b"
    TIE = "tie"


@dataclass(frozen=True)
class JudgeOutcome:
    score_based: Winner
    round_based: Winner
    scores: tuple[float, float, float, float]  # (a_round1, b_round1, a_round2, b_round2)
    raw_round1: str = ""
    raw_round2: str = ""


def judge_outcome(a1: float, b1: float, a2: float, b2: float) -> tuple[Winner, Winner]:
    """Outcomes as a pure function of the four raw scores.

    Score-based compares round totals. Round-based requires winning both
    rounds outright; a split or any tied round is a tie.
    """
    total_a, total_b = a1 + a2, b1 + b2
    if total_a > total_b:
        score_based = Winner.A
    elif total_b > total_a:
        score_based = Winner.B
    else:
        score_based = Winner.TIE
    if a1 > b1 and a2 > b2:
        round_based = Winner.A
    elif b1 > a1 and b2 > a2:
        round_based = Winner.B
    else:
        round_based = Winner.TIE
    return score_based, round_based


def _parse_judge_scores(raw: str) -> tuple[float, float]:
    """Scores from the last JSON object in the judge's output."""
    found: tuple[float, float] | None = None
    for obj in iter_json_objects(raw):
        if "answer_1_score" not in obj or "answer_2_score" not in obj:
            continue
        try:
            scores = (float(obj["answer_1_score"]), float(obj["answer_2_score"]))
        except (TypeError, ValueError):
            continue
        found = scores
    if found is None:
        raise ParseError("judge output has no parseable score object")
    if not all(0.0 <= s <= 10.0 for s in found):
        raise ParseError(f"judge scores {found} outside [0, 10]")
    return found


def judge_pairwise(
    question: str,
    gold_answer: str,
    answer_a: str,
    answer_b: str,
    llm: LlmClient,
) -> JudgeOutcome:
    """Two-round pairwise judging with swapped answer positions.

    Round 1 shows answer A first; round 2 swaps, so positional bias cancels.
    Raw judge text is kept on the outcome for audit.
    """
    raw1 = llm.generate(render_judge_prompt(question, gold_answer, answer_a, answer_b), max_tokens=1024)
    a1, b1 = _parse_judge_scores(raw1)
    raw2 = llm.generate(render_judge_prompt(question, gold_answer, answer_b, answer_a), max_tokens=1024)
    b2, a2 = _parse_judge_scores(raw2)
    score_based, round_based = judge_outcome(a1, b1, a2, b2)
    return JudgeOutcome(score_based, round_based, (a1, b1, a2, b2), raw1, raw2)
