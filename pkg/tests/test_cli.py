from __future__ import annotations

import json

import pytest

from mcidx.cli import RunConfig, build_parser, parse_k_list, run
from mcidx.corpus import write_corpus_jsonl, write_qa_jsonl
from mcidx.synthetic import synthetic_corpus

MARKDOWN = """# Guide
Intro sentences live here. They describe the guide.
## Setup
Install the tool first. Then configure it carefully. Check the output twice.
## Usage
Run the indexer on your corpus. Inspect the resulting report.
## References
This body is dropped at ingestion.
"""


@pytest.fixture
def dataset(tmp_path):
    docs, qa = synthetic_corpus(n_docs=2, questions_per_doc=2)
    corpus = tmp_path / "corpus.jsonl"
    qa_path = tmp_path / "qa.jsonl"
    write_corpus_jsonl(docs, corpus)
    write_qa_jsonl(qa, qa_path)
    return corpus, qa_path


class TestExitCodes:
    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0
        assert "mcidx" in capsys.readouterr().out

    @pytest.mark.parametrize("argv", [
        ["ingest", "--help"],
        ["chunk", "--help"],
        ["views", "--help"],
        ["index", "--help"],
        ["retrieve", "--help"],
        ["eval", "recall", "--help"],
        ["eval", "chunking-error", "--help"],
        ["eval", "answers", "--help"],
        ["stats", "--help"],
    ])
    def test_subcommand_help(self, argv, capsys):
        assert run(argv) == 0
        out = capsys.readouterr().out
        assert "--" in out

    def test_unknown_flag_is_usage_error(self, capsys):
        assert run(["stats", "--corpus", "x.jsonl", "--frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_missing_corpus_is_data_error(self, tmp_path, capsys):
        missing = tmp_path / "nope.jsonl"
        code = run(["stats", "--corpus", str(missing)])
        assert code == 2
        assert str(missing) in capsys.readouterr().err

    def test_bad_scheme_spec_is_usage_error(self, dataset, capsys):
        corpus, qa = dataset
        code = run(["eval", "recall", "--corpus", str(corpus), "--qa", str(qa),
                    "--scheme", "semantic", "--retriever", "bm25",
                    "--mode", "single:raw", "--k", "3"])
        assert code == 1

    def test_llm_generator_without_env_is_provider_error(self, dataset, monkeypatch, capsys):
        monkeypatch.delenv("MCIDX_LLM_URL", raising=False)
        corpus, qa = dataset
        code = run(["eval", "recall", "--corpus", str(corpus), "--qa", str(qa),
                    "--scheme", "content", "--retriever", "bm25",
                    "--mode", "mc", "--k", "3", "--generator", "llm"])
        assert code == 3
        assert "MCIDX_LLM_URL" in capsys.readouterr().err


class TestPipeline:
    def test_ingest_excludes_reference_sections(self, tmp_path, capsys):
        source = tmp_path / "guide.md"
        source.write_text(MARKDOWN)
        out = tmp_path / "corpus.jsonl"
        assert run(["ingest", str(source), "--output", str(out)]) == 0
        record = json.loads(out.read_text().splitlines()[0])
        assert record["doc_id"] == "guide"
        headings = [s["heading"] for s in record["sections"]]
        assert "References" not in headings
        assert headings == ["Guide", "Setup", "Usage"]

    def test_chunk_writes_jsonl(self, dataset, tmp_path):
        corpus, _ = dataset
        out = tmp_path / "chunks.jsonl"
        assert run(["chunk", "--corpus", str(corpus), "--scheme", "flc:100",
                    "--output", str(out)]) == 0
        records = [json.loads(line) for line in out.read_text().splitlines()]
        assert all(r["scheme"] == "flc:100" for r in records)
        assert {"chunk_id", "doc_id", "section_id", "char_start", "char_end", "scheme"} == set(records[0])

    def test_views_then_indexes_then_mc_retrieve(self, dataset, tmp_path, capsys):
        corpus, _ = dataset
        views = tmp_path / "views.jsonl"
        assert run(["views", "--corpus", str(corpus), "--output", str(views)]) == 0
        dirs = {}
        for view in ("raw", "keywords", "summary"):
            dirs[view] = tmp_path / f"idx_{view}"
            assert run(["index", "--corpus", str(corpus), "--scheme", "content",
                        "--retriever", "bm25", "--view", view, "--views", str(views),
                        "--output", str(dirs[view])]) == 0
        capsys.readouterr()
        assert run(["retrieve", "--mode", "mc",
                    "--index", str(dirs["raw"]), str(dirs["keywords"]), str(dirs["summary"]),
                    "--question", "anything at all", "--k", "3"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        records = [json.loads(line) for line in lines]
        assert records and all("unit_id" in r and "views" in r for r in records)

    def test_single_retrieve_ranks(self, dataset, tmp_path, capsys):
        corpus, _ = dataset
        idx = tmp_path / "idx"
        assert run(["index", "--corpus", str(corpus), "--scheme", "flc:200",
                    "--retriever", "tfidf", "--output", str(idx)]) == 0
        capsys.readouterr()
        assert run(["retrieve", "--index", str(idx), "--question", "anything", "--k", "4"]) == 0
        records = [json.loads(line) for line in capsys.readouterr().out.strip().splitlines()]
        assert [r["rank"] for r in records] == [1, 2, 3, 4]

    def test_eval_recall_byte_identical_runs(self, dataset, tmp_path):
        corpus, qa = dataset
        outputs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            code = run(["eval", "recall", "--corpus", str(corpus), "--qa", str(qa),
                        "--scheme", "content", "--retriever", "dense:mock",
                        "--mode", "mc", "--k", "1.5,3,5,10",
                        "--output", str(out)])
            assert code == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        header = outputs[0].decode().splitlines()[0]
        assert header == "scheme,retriever,mode,k,n,mean_recall"

    def test_eval_recall_markdown_output(self, dataset, tmp_path):
        corpus, qa = dataset
        md = tmp_path / "table.md"
        assert run(["eval", "recall", "--corpus", str(corpus), "--qa", str(qa),
                    "--scheme", "content", "--retriever", "bm25",
                    "--mode", "single:summary", "--k", "3,5",
                    "--output", str(tmp_path / "r.csv"), "--markdown", str(md)]) == 0
        assert "k=3" in md.read_text()

    def test_eval_chunking_error_multiple_schemes(self, dataset, tmp_path, capsys):
        corpus, qa = dataset
        assert run(["eval", "chunking-error", "--corpus", str(corpus), "--qa", str(qa),
                    "--scheme", "flc:100", "flc-content:100", "content"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "scheme,n_scopes,n_split,error_rate"
        content_row = [l for l in lines if l.startswith("content,")][0]
        assert content_row.endswith("0,0.000000")

    def test_stats_json(self, dataset, capsys):
        corpus, qa = dataset
        assert run(["stats", "--corpus", str(corpus), "--qa", str(qa)]) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["n_documents"] == 2
        assert stats["n_questions"] == 4

    def test_eval_answers_with_stub_llm(self, dataset, tmp_path, stub, monkeypatch, capsys):
        corpus, qa = dataset
        monkeypatch.setenv("MCIDX_LLM_URL", stub.url)

        def responder(path, payload):
            prompt = payload["prompt"]
            if "evaluating answers" in prompt:
                return (200, {"text": 'reasoning\n{"answer_1_score": "7", "answer_2_score": "4"}'})
            return (200, {"text": "a generated answer"})

        stub.responder = responder
        transcripts = tmp_path / "judge.jsonl"
        code = run(["eval", "answers", "--corpus", str(corpus), "--qa", str(qa),
                    "--retriever", "bm25", "--k", "3",
                    "--scheme-a", "content", "--mode-a", "mc",
                    "--scheme-b", "flc:300", "--mode-b", "single:raw",
                    "--output", str(transcripts)])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["n_questions"] == 4
        records = [json.loads(line) for line in transcripts.read_text().splitlines()]
        assert len(records) == 4
        assert all(r["scores"] == [7.0, 4.0, 4.0, 7.0] for r in records)
        assert all(r["score_based"] == "tie" for r in records)


class TestRunConfig:
    def test_validate_round_trips_specs(self, tmp_path):
        config = RunConfig(
            corpus=tmp_path / "c.jsonl",
            qa=tmp_path / "q.jsonl",
            scheme="flc-content:200",
            mode="single:keywords",
            retriever="dense:mock",
            ks=(1.5, 3.0),
            output=None,
        )
        assert config.validate() is config

    def test_bad_k_rejected(self, tmp_path):
        config = RunConfig(tmp_path / "c", tmp_path / "q", "content", "mc", "bm25", (2.5,), None)
        with pytest.raises(ValueError):
            config.validate()

    def test_parse_k_list(self):
        assert parse_k_list("1.5,3,5,10") == (1.5, 3.0, 5.0, 10.0)
        with pytest.raises(ValueError):
            parse_k_list("three")

    def test_parser_builds(self):
        assert build_parser().prog == "mcidx"
