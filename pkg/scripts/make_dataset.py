"""Write the bundled synthetic corpus and QA set to JSONL files.

The output is a deterministic function of the seed, so experiment runs on it
are reproducible byte for byte.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from mcidx.corpus import write_corpus_jsonl, write_qa_jsonl
from mcidx.synthetic import synthetic_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("data"))
    parser.add_argument("--n-docs", type=int, default=10)
    parser.add_argument("--questions-per-doc", type=int, default=3)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    docs, qa = synthetic_corpus(
        n_docs=args.n_docs, questions_per_doc=args.questions_per_doc, seed=args.seed
    )
    args.out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = args.out_dir / "corpus.jsonl"
    qa_path = args.out_dir / "qa.jsonl"
    write_corpus_jsonl(docs, corpus_path)
    write_qa_jsonl(qa, qa_path)
    print(f"wrote {len(docs)} documents to {corpus_path}")
    print(f"wrote {len(qa)} questions to {qa_path}")


if __name__ == "__main__":
    main()
