"""Generate the 200-record synthetic fixture corpus.

Each record gets twelve topic tokens drawn without replacement from a
global pseudo-word pool, so question embeddings are near-orthogonal:
paraphrases of a question stay far more similar to it than any other
record ever gets. Category counts follow the 47/23/15/10/5 mix. The
output is deterministic; the checked-in data/fixture_corpus.jsonl is
exactly what this script prints into it.

Usage: python scripts/make_fixture.py [out.jsonl]
"""

import itertools
import random
import sys
from pathlib import Path

from qabot import HashedTfidfEmbedder, QARecord, deduplicate, split_sentences, write_jsonl

SEED = 1337
N_RECORDS = 200
TOKENS_PER_QUESTION = 12
CATEGORY_COUNTS = [
    ("fiqh_ibadah", 94),
    ("muamalah", 46),
    ("aqidah", 30),
    ("akhlak", 20),
    ("tafsir_history", 10),
]

SYLLABLES = [
    "ba", "da", "fa", "gha", "ha", "ja", "ka", "la", "ma", "na",
    "qa", "ra", "sa", "ta", "wa", "za", "shi", "ri", "mu", "du",
]

QUESTION_TEMPLATE = (
    "What is the proper guidance on {0} {1} {2} {3} when {4} {5} "
    "involves {6} {7} during {8} {9} and {10} {11}?"
)

ANSWER_TEMPLATE = (
    "The recommended practice concerning {0} {1} and {2} {3} is to follow "
    "the established teachings with care and sincerity. Scholars note that "
    "{4} {5} together with {6} {7} should be observed in the proper order "
    "at every occasion. Communities uphold {8} {9} as well as {10} {11} "
    "through regular study and patient consultation."
)


def make_vocabulary(rng: random.Random) -> list[str]:
    words = ["".join(parts) for parts in itertools.product(SYLLABLES, repeat=3)]
    rng.shuffle(words)
    return words[: N_RECORDS * TOKENS_PER_QUESTION]


def make_records() -> list[QARecord]:
    rng = random.Random(SEED)
    vocab = make_vocabulary(rng)
    categories = [cat for cat, count in CATEGORY_COUNTS for _ in range(count)]
    records = []
    for i in range(N_RECORDS):
        words = vocab[i * TOKENS_PER_QUESTION : (i + 1) * TOKENS_PER_QUESTION]
        records.append(
            QARecord(
                id=f"q_{i:04d}",
                question=QUESTION_TEMPLATE.format(*words),
                answer=ANSWER_TEMPLATE.format(*words),
                category=categories[i],
            )
        )
    return records


def check(records: list[QARecord]) -> None:
    assert len(records) == N_RECORDS
    assert len({r.id for r in records}) == N_RECORDS
    for cat, count in CATEGORY_COUNTS:
        assert sum(1 for r in records if r.category == cat) == count, cat
    for r in records:
        assert len(r.answer.split()) >= 20, r.id
        assert 2 <= len(split_sentences(r.answer)) <= 5, r.id

    embedder = HashedTfidfEmbedder()
    embedder.fit(r.question for r in records)
    vectors = [embedder.embed_text(r.question).values for r in records]
    worst = 0.0
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            worst = max(worst, float(vectors[i] @ vectors[j]))
    assert worst < 0.5, f"cross-question similarity too high: {worst}"

    kept, report = deduplicate(records, embedder, threshold=0.95)
    assert len(kept) == N_RECORDS and not report.groups


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/fixture_corpus.jsonl")
    records = make_records()
    check(records)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(records, out)
    print(f"wrote {len(records)} records to {out}")


if __name__ == "__main__":
    main()
