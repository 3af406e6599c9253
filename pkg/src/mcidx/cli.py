"""Command-line surface wiring the pipeline into reproducible runs.

Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error. All
diagnostics go to stderr; data goes to files or stdout. Every run with the
extractive generator and the mock embedding provider is fully offline and
byte-for-byte reproducible.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .chunking import ChunkScheme, chunk_document, chunking_error, write_chunks_jsonl
from .corpus import (
    corpus_stats,
    load_and_filter_qa,
    load_corpus_jsonl,
    parse_markdown,
    write_corpus_jsonl,
)
from .errors import McIndexError, ParseError, ProviderError
from .evaluation import (
    MODE_MC,
    build_doc_context,
    eval_recall,
    generate_answer,
    judge_pairwise,
    parse_mode,
    retrieve_unit_ids,
)
from .fusion import retrieve_mc, retrieve_single
from .jsonio import write_jsonl
from .providers import HttpLlmClient
from .retrieval import (
    DENSE,
    DenseIndex,
    build_dense_index,
    build_sparse_index,
    parse_retriever,
    resolve_provider,
)
from .store import load_index, save_index
from .views import (
    EXTRACTIVE_GENERATOR,
    LLM_GENERATOR,
    ViewKind,
    build_views,
    read_views_jsonl,
    view_texts,
    write_views_jsonl,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3


@dataclass(frozen=True)
class RunConfig:
    """One reproducible evaluation run; spec strings appear verbatim in reports."""

    corpus: Path
    qa: Path
    scheme: str
    mode: str
    retriever: str
    ks: tuple[float, ...]
    output: Path | None

    def validate(self) -> "RunConfig":
        ChunkScheme.parse(self.scheme)
        parse_mode(self.mode)
        parse_retriever(self.retriever)
        for k in self.ks:
            if k != 1.5 and not float(k).is_integer():
                raise ValueError(f"bad budget {k!r}: must be 1.5 or an integer")
        return self


def parse_k_list(spec: str) -> tuple[float, ...]:
    ks = []
    for piece in spec.split(","):
        piece = piece.strip()
        try:
            value = float(piece)
        except ValueError:
            raise ValueError(f"bad budget {piece!r} in k list") from None
        ks.append(int(value) * 1.0 if value.is_integer() else value)
    if not ks:
        raise ValueError("empty k list")
    return tuple(ks)


def _load_views_arg(args, docs):
    if getattr(args, "views", None):
        return read_views_jsonl(args.views)
    return None


def _llm_from_env(jobs: int):
    return HttpLlmClient.from_env(max_in_flight=jobs)


def _corpus_units(docs, scheme: ChunkScheme, view: ViewKind | None, views_by_doc):
    """Corpus-wide (unit_id, text) pairs; ids are doc-qualified.

    View indexes are keyed by section id (identical across the three views so
    they can be fused); plain chunk indexes are keyed by chunk id.
    """
    units = []
    for doc in docs:
        if view is ViewKind.RAW_TEXT:
            units.extend((f"{doc.doc_id}#{s.section_id}", s.text) for s in doc.sections)
        elif view in (ViewKind.KEYWORDS, ViewKind.SUMMARY):
            entries = views_by_doc[doc.doc_id]
            units.extend((f"{doc.doc_id}#{sid}", text) for sid, text in view_texts(entries, view))
        else:
            for chunk in chunk_document(doc, scheme):
                units.append((f"{doc.doc_id}#{chunk.chunk_id}", chunk.text))
    return units


def cmd_ingest(args) -> int:
    docs = []
    for path in args.inputs:
        path = Path(path)
        docs.append(parse_markdown(path.read_text(encoding="utf-8"), doc_id=path.stem))
    write_corpus_jsonl(docs, args.output)
    logger.info("wrote %d documents to %s", len(docs), args.output)
    return EXIT_OK


def cmd_chunk(args) -> int:
    docs = load_corpus_jsonl(args.corpus)
    scheme = ChunkScheme.parse(args.scheme)
    chunks = [c for doc in docs for c in chunk_document(doc, scheme)]
    write_chunks_jsonl(chunks, args.output)
    logger.info("wrote %d chunks to %s", len(chunks), args.output)
    return EXIT_OK


def cmd_views(args) -> int:
    docs = load_corpus_jsonl(args.corpus)
    llm = _llm_from_env(args.jobs) if args.generator == LLM_GENERATOR else None
    views_by_doc = {
        doc.doc_id: build_views(doc, generator=args.generator, llm=llm, jobs=args.jobs)
        for doc in docs
    }
    write_views_jsonl(views_by_doc, args.output)
    logger.info("wrote views for %d documents to %s", len(views_by_doc), args.output)
    return EXIT_OK


def cmd_index(args) -> int:
    docs = load_corpus_jsonl(args.corpus)
    scheme = ChunkScheme.parse(args.scheme)
    kind, provider_name = parse_retriever(args.retriever)
    view = ViewKind(args.view) if args.view else None
    views_by_doc = None
    if view is not None and scheme.kind != "content":
        raise ValueError("view indexes require --scheme content")
    if view in (ViewKind.KEYWORDS, ViewKind.SUMMARY):
        views_by_doc = _load_views_arg(args, docs) or {
            doc.doc_id: build_views(doc, generator=EXTRACTIVE_GENERATOR) for doc in docs
        }
    units = _corpus_units(docs, scheme, view, views_by_doc)
    if kind == DENSE:
        index = build_dense_index(units, resolve_provider(provider_name))
    else:
        index = build_sparse_index(units, kind)
    save_index(index, args.output)
    logger.info("saved %s index of %d units to %s", args.retriever, len(units), args.output)
    return EXIT_OK


def cmd_retrieve(args) -> int:
    mode_kind, _ = parse_mode(args.mode)
    indexes = [load_index(d) for d in args.index]
    providers = {
        index.provider: resolve_provider(index.provider)
        for index in indexes
        if isinstance(index, DenseIndex)
    }
    provider = next(iter(providers.values()), None)
    if mode_kind == MODE_MC:
        if len(indexes) != 3:
            raise ValueError("--mode mc needs three index directories: raw keywords summary")
        view_indexes = dict(zip((ViewKind.RAW_TEXT, ViewKind.KEYWORDS, ViewKind.SUMMARY), indexes))
        fused = retrieve_mc(view_indexes, args.question, args.k, args.ordinal, provider,
                            k1=args.k1, b=args.b)
        for pos, unit in enumerate(fused.units, start=1):
            print(json.dumps({
                "unit_id": unit.unit_id,
                "position": pos,
                "views": sorted(v.value for v in unit.views),
                "view_ranks": {v.value: r for v, r in unit.view_ranks.items()},
            }))
    else:
        if len(indexes) != 1:
            raise ValueError("single-view retrieval takes exactly one index directory")
        scored = retrieve_single(indexes[0], args.question, args.k, args.ordinal, provider,
                                 k1=args.k1, b=args.b)
        for unit in scored:
            print(json.dumps({"unit_id": unit.unit_id, "score": unit.score, "rank": unit.rank}))
    return EXIT_OK


def cmd_eval_recall(args) -> int:
    config = RunConfig(
        corpus=Path(args.corpus),
        qa=Path(args.qa),
        scheme=args.scheme,
        mode=args.mode,
        retriever=args.retriever,
        ks=parse_k_list(args.k),
        output=Path(args.output) if args.output else None,
    ).validate()
    docs = load_corpus_jsonl(config.corpus)
    qa = load_and_filter_qa(config.qa, docs)
    llm = _llm_from_env(args.jobs) if args.generator == LLM_GENERATOR else None
    report = eval_recall(
        docs,
        qa,
        config.scheme,
        config.retriever,
        config.mode,
        list(config.ks),
        views=_load_views_arg(args, docs),
        generator=args.generator,
        llm=llm,
        invert_parity=args.invert_parity,
        k1=args.k1,
        b=args.b,
    )
    csv_text = report.to_csv()
    if config.output:
        config.output.parent.mkdir(parents=True, exist_ok=True)
        config.output.write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    if args.markdown:
        Path(args.markdown).write_text(report.to_markdown(), encoding="utf-8")
    return EXIT_OK


def cmd_eval_chunking_error(args) -> int:
    docs = load_corpus_jsonl(args.corpus)
    qa = load_and_filter_qa(args.qa, docs)
    lines = ["scheme,n_scopes,n_split,error_rate"]
    for spec in args.scheme:
        scheme = ChunkScheme.parse(spec)
        chunks = [c for doc in docs for c in chunk_document(doc, scheme)]
        report = chunking_error(chunks, qa, docs)
        lines.append(f"{spec},{report.n_scopes},{report.n_split},{report.error_rate:.6f}")
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval_answers(args) -> int:
    docs = load_corpus_jsonl(args.corpus)
    qa = load_and_filter_qa(args.qa, docs)
    by_id = {d.doc_id: d for d in docs}
    llm = _llm_from_env(args.jobs)

    views_by_doc = _load_views_arg(args, docs)

    def side(scheme_spec: str, mode: str):
        scheme = ChunkScheme.parse(scheme_spec)
        mode_kind, view = parse_mode(mode)
        retriever_kind, provider_name = parse_retriever(args.retriever)
        provider = resolve_provider(provider_name) if retriever_kind == DENSE else None
        needs_views = mode_kind == MODE_MC or view in (ViewKind.KEYWORDS, ViewKind.SUMMARY)
        contexts = {}

        def texts_for(item, ordinal):
            doc = by_id[item.doc_id]
            if doc.doc_id not in contexts:
                doc_views = None
                if needs_views:
                    doc_views = (
                        views_by_doc[doc.doc_id]
                        if views_by_doc
                        else build_views(doc, generator=args.generator,
                                         llm=llm if args.generator == LLM_GENERATOR else None)
                    )
                contexts[doc.doc_id] = build_doc_context(doc, scheme, mode, retriever_kind, provider, doc_views)
            ctx = contexts[doc.doc_id]
            unit_ids = retrieve_unit_ids(ctx, item.question, args.k, ordinal, provider)
            return [ctx.text_by_unit[uid] for uid in unit_ids]

        return texts_for

    texts_a = side(args.scheme_a, args.mode_a)
    texts_b = side(args.scheme_b, args.mode_b)
    records = []
    tallies = {"score_based": {"a": 0, "b": 0, "tie": 0}, "round_based": {"a": 0, "b": 0, "tie": 0}}
    for ordinal, item in enumerate(qa):
        answer_a = generate_answer(item.question, texts_a(item, ordinal), llm)
        answer_b = generate_answer(item.question, texts_b(item, ordinal), llm)
        outcome = judge_pairwise(item.question, item.answer, answer_a, answer_b, llm)
        tallies["score_based"][outcome.score_based.value] += 1
        tallies["round_based"][outcome.round_based.value] += 1
        records.append(
            {
                "question_id": item.question_id,
                "answer_a": answer_a,
                "answer_b": answer_b,
                "scores": list(outcome.scores),
                "score_based": outcome.score_based.value,
                "round_based": outcome.round_based.value,
                "judge_round1": outcome.raw_round1,
                "judge_round2": outcome.raw_round2,
            }
        )
    write_jsonl(args.output, records)
    print(json.dumps({"n_questions": len(records), **tallies}))
    return EXIT_OK


def cmd_stats(args) -> int:
    docs = load_corpus_jsonl(args.corpus)
    qa = load_and_filter_qa(args.qa, docs) if args.qa else []
    print(json.dumps(corpus_stats(docs, qa).to_dict()))
    return EXIT_OK


def _add_bm25_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k1", type=float, default=1.5, help="BM25 term saturation")
    parser.add_argument("--b", type=float, default=0.75, help="BM25 length normalization")


def _add_jobs_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker pool size for provider calls")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcidx",
        description="Multi-view content-aware indexing and retrieval evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse markdown files into corpus JSONL")
    p.add_argument("inputs", nargs="+", help="markdown files (doc_id = file stem)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("chunk", help="chunk a corpus under one scheme")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scheme", required=True, help="content | flc:<N> | flc-content:<N>")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("views", help="generate raw/keywords/summary views per section")
    p.add_argument("--corpus", required=True)
    p.add_argument("--generator", choices=(LLM_GENERATOR, EXTRACTIVE_GENERATOR),
                   default=EXTRACTIVE_GENERATOR)
    p.add_argument("--output", required=True)
    _add_jobs_flag(p)
    p.set_defaults(func=cmd_views)

    p = sub.add_parser("index", help="build and save one index over the corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scheme", required=True)
    p.add_argument("--retriever", required=True, help="tfidf | bm25 | dense:<provider>")
    p.add_argument("--view", choices=("raw", "keywords", "summary"), default=None,
                   help="index a view instead of chunk text (content scheme only)")
    p.add_argument("--views", default=None, help="views.jsonl to reuse")
    p.add_argument("--output", required=True, help="index directory")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("retrieve", help="rank units for one ad-hoc question")
    p.add_argument("--index", nargs="+", required=True,
                   help="index directory (three for --mode mc: raw keywords summary)")
    p.add_argument("--mode", default="single:raw", help="mc | single:<raw|keywords|summary>")
    p.add_argument("--question", required=True)
    p.add_argument("--k", type=float, default=5)
    p.add_argument("--ordinal", type=int, default=0, help="question ordinal for budget alternation")
    _add_bm25_flags(p)
    p.set_defaults(func=cmd_retrieve)

    p_eval = sub.add_parser("eval", help="evaluation harness")
    eval_sub = p_eval.add_subparsers(dest="eval_command", required=True)

    p = eval_sub.add_parser("recall", help="answer-scope recall per budget k")
    p.add_argument("--corpus", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--scheme", required=True)
    p.add_argument("--retriever", required=True)
    p.add_argument("--mode", required=True)
    p.add_argument("--k", required=True, help="comma-separated budgets, e.g. 1.5,3,5,10")
    p.add_argument("--views", default=None, help="views.jsonl to reuse")
    p.add_argument("--generator", choices=(LLM_GENERATOR, EXTRACTIVE_GENERATOR),
                   default=EXTRACTIVE_GENERATOR)
    p.add_argument("--invert-parity", action="store_true",
                   help="give even ordinals the larger alternating budget")
    p.add_argument("--output", default=None, help="CSV path (default: stdout)")
    p.add_argument("--markdown", default=None, help="also write a markdown table here")
    _add_bm25_flags(p)
    _add_jobs_flag(p)
    p.set_defaults(func=cmd_eval_recall)

    p = eval_sub.add_parser("chunking-error", help="fraction of split answer scopes")
    p.add_argument("--corpus", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--scheme", required=True, nargs="+")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_eval_chunking_error)

    p = eval_sub.add_parser("answers", help="generate and judge answers for two setups")
    p.add_argument("--corpus", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--retriever", required=True)
    p.add_argument("--k", type=float, default=5)
    p.add_argument("--scheme-a", required=True)
    p.add_argument("--mode-a", required=True)
    p.add_argument("--scheme-b", required=True)
    p.add_argument("--mode-b", required=True)
    p.add_argument("--views", default=None)
    p.add_argument("--generator", choices=(LLM_GENERATOR, EXTRACTIVE_GENERATOR),
                   default=EXTRACTIVE_GENERATOR)
    p.add_argument("--output", required=True, help="transcripts JSONL")
    _add_jobs_flag(p)
    p.set_defaults(func=cmd_eval_answers)

    p = sub.add_parser("stats", help="corpus statistics as JSON")
    p.add_argument("--corpus", required=True)
    p.add_argument("--qa", default=None)
    p.set_defaults(func=cmd_stats)

    return parser


def run(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (ProviderError, ParseError) as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except FileNotFoundError as exc:
        print(f"missing file: {exc.filename or exc}", file=sys.stderr)
        return EXIT_DATA
    except McIndexError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
