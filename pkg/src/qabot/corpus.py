"""Corpus preparation pipeline.

Takes raw question/answer data through selection filters, text cleaning,
semantic deduplication, answer summarization and a stratified train/test
split. All stages are pure functions over immutable inputs and are
deterministic for a fixed seed.
"""

from __future__ import annotations

import csv
import json
import math
import random
import re

import numpy as np
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import ConfigError, ProviderError, SchemaError

DEFAULT_CATEGORIES = (
    "fiqh_ibadah",
    "muamalah",
    "aqidah",
    "akhlak",
    "tafsir_history",
)

_MARKUP_RE = re.compile(r"<[^>]*>")


@dataclass
class QARecord:
    """One question/answer/category triple, the unit of the corpus."""

    id: str
    question: str
    answer: str
    category: str
    source_ref: Optional[str] = None

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "question": self.question,
            "answer": self.answer,
            "category": self.category,
        }
        if self.source_ref is not None:
            out["source_ref"] = self.source_ref
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "QARecord":
        return cls(
            id=str(obj["id"]),
            question=str(obj["question"]),
            answer=str(obj["answer"]),
            category=str(obj["category"]),
            source_ref=obj.get("source_ref"),
        )


@dataclass
class FilterRules:
    min_answer_words: int = 20
    require_both_fields: bool = True
    allowed_categories: Optional[frozenset[str]] = None

    def __post_init__(self) -> None:
        if self.min_answer_words < 0:
            raise ConfigError("min_answer_words must be >= 0")
        if self.allowed_categories is not None:
            self.allowed_categories = frozenset(self.allowed_categories)


def _load_wordlist(name: str) -> frozenset[str]:
    text = resources.files("qabot.data").joinpath(name).read_text(encoding="utf-8")
    return frozenset(tok for tok in (line.strip() for line in text.splitlines()) if tok)


def default_stopwords(language: str = "en") -> frozenset[str]:
    """Bundled stopword list; 'en' or 'id'."""
    if language not in ("en", "id"):
        raise ConfigError(f"no bundled stopword list for language {language!r}")
    return _load_wordlist(f"stopwords_{language}.txt")


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file, one token per line; blank lines ignored."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        tok = line.strip()
        if tok:
            words.add(tok)
    return frozenset(words)


def load_stem_rules(path: str | Path) -> list[tuple[str, str]]:
    """Read suffix rules, one per line as ``suffix=replacement``.

    The replacement may be empty (plain suffix stripping). Lines starting
    with '#' and blank lines are ignored. Rules are applied
    longest-suffix-first regardless of file order.
    """
    rules = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(f"stem rule line {i}: expected 'suffix=replacement', got {line!r}")
        suffix, replacement = line.split("=", 1)
        if not suffix:
            raise SchemaError(f"stem rule line {i}: empty suffix")
        rules.append((suffix, replacement))
    return rules


@dataclass
class CleaningConfig:
    lowercase: bool = True
    strip_markup: bool = True
    strip_non_alphabetic_symbols: bool = True
    stopword_list: frozenset[str] = field(default_factory=lambda: default_stopwords("en"))
    stem_rules: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.stopword_list = frozenset(self.stopword_list)
        if "" in self.stopword_list:
            raise ConfigError("stopword list must not contain empty tokens")
        # longest-suffix-first application order
        self.stem_rules = sorted(self.stem_rules, key=lambda r: len(r[0]), reverse=True)


@dataclass
class SplitCorpus:
    train: list[QARecord]
    test: list[QARecord]
    seed: int
    ratio: float


@dataclass
class DedupGroup:
    kept_id: str
    removed_ids: list[str]
    similarities: list[tuple[str, str, float]]  # threshold-crossing pairs only


@dataclass
class DedupReport:
    groups: list[DedupGroup]
    threshold_used: float

    def to_json(self) -> dict:
        return {
            "threshold_used": self.threshold_used,
            "groups": [
                {
                    "kept_id": g.kept_id,
                    "removed_ids": list(g.removed_ids),
                    "similarities": [[a, b, s] for a, b, s in g.similarities],
                }
                for g in self.groups
            ],
        }


def load_raw(path: str | Path, format: str = "csv") -> list[QARecord]:
    """Load raw records from a CSV or JSON-lines file, text unmodified.

    CSV needs a header with question, answer and category columns; an id
    column is optional and synthesized as ``q_<row index, zero-padded>``
    when absent. JSON-lines expects one object per line with the same keys.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    if format == "csv":
        return _load_csv(path)
    if format == "jsonl":
        return _load_jsonl(path)
    raise ConfigError(f"unknown input format {format!r} (expected 'csv' or 'jsonl')")


def _load_csv(path: Path) -> list[QARecord]:
    records = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in ("question", "answer", "category"):
            if col not in header:
                raise SchemaError(f"CSV is missing required column: {col}")
        has_id = "id" in header
        has_source = "source_ref" in header
        for i, row in enumerate(reader):
            rownum = i + 2  # 1-based, counting the header line
            if any(row.get(c) is None for c in ("question", "answer", "category")):
                raise SchemaError(f"malformed CSV row {rownum}: wrong field count")
            if None in row:
                raise SchemaError(f"malformed CSV row {rownum}: extra fields")
            rid = row["id"] if has_id and row.get("id") else f"q_{i:04d}"
            records.append(
                QARecord(
                    id=rid,
                    question=row["question"],
                    answer=row["answer"],
                    category=row["category"],
                    source_ref=row["source_ref"] if has_source and row.get("source_ref") else None,
                )
            )
    _check_unique_ids(records)
    return records


def _load_jsonl(path: Path) -> list[QARecord]:
    records = []
    with path.open(encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"malformed JSON on line {i}: {e.msg}") from e
            if not isinstance(obj, dict):
                raise SchemaError(f"malformed JSON on line {i}: expected an object")
            missing = [c for c in ("question", "answer", "category") if c not in obj]
            if missing:
                raise SchemaError(f"line {i} is missing required column: {missing[0]}")
            rid = str(obj["id"]) if obj.get("id") else f"q_{i - 1:04d}"
            records.append(
                QARecord(
                    id=rid,
                    question=str(obj["question"]),
                    answer=str(obj["answer"]),
                    category=str(obj["category"]),
                    source_ref=obj.get("source_ref"),
                )
            )
    _check_unique_ids(records)
    return records


def _check_unique_ids(records: Sequence[QARecord]) -> None:
    seen: set[str] = set()
    for r in records:
        if r.id in seen:
            raise SchemaError(f"duplicate record id: {r.id}")
        seen.add(r.id)


DROP_REASONS = ("empty_field", "short_answer", "category_excluded")


def filter_records(
    records: Sequence[QARecord], rules: FilterRules
) -> tuple[list[QARecord], dict[str, int]]:
    """Apply selection rules; returns kept records plus drop counts per reason.

    Reasons are checked in order: empty_field, short_answer,
    category_excluded. The first failing rule claims the drop.
    """
    kept = []
    report = {reason: 0 for reason in DROP_REASONS}
    for rec in records:
        if rules.require_both_fields and (
            not clean_text(rec.question, _BARE_CLEANING) or not clean_text(rec.answer, _BARE_CLEANING)
        ):
            report["empty_field"] += 1
        elif len(rec.answer.split()) < rules.min_answer_words:
            report["short_answer"] += 1
        elif rules.allowed_categories is not None and rec.category not in rules.allowed_categories:
            report["category_excluded"] += 1
        else:
            kept.append(rec)
    return kept, report


def clean_text(text: str, config: CleaningConfig | None = None) -> str:
    """Normalize raw text: drop markup tags, replace non-letter symbols with
    spaces, collapse whitespace, lowercase. Idempotent."""
    if config is None:
        config = _default_cleaning()
    if config.strip_markup:
        text = _MARKUP_RE.sub(" ", text)
    if config.strip_non_alphabetic_symbols:
        text = "".join(ch if ch.isalpha() or ch.isspace() else " " for ch in text)
    text = " ".join(text.split())
    if config.lowercase:
        text = text.lower()
    return text


def tokenize_normalize(cleaned: str, config: CleaningConfig | None = None) -> list[str]:
    """Split cleaned text on whitespace, drop stopwords, then apply the
    longest matching suffix rule to each surviving token.

    A rule only fires when it leaves a non-empty token behind, so the
    output never contains empty strings.
    """
    if config is None:
        config = _default_cleaning()
    tokens = []
    for tok in cleaned.split():
        if tok in config.stopword_list:
            continue
        for suffix, replacement in config.stem_rules:
            if tok.endswith(suffix) and len(tok) > len(suffix):
                tok = tok[: len(tok) - len(suffix)] + replacement
                break
        if tok:
            tokens.append(tok)
    return tokens


# Cleaning with no stopword list, for emptiness checks and summarization
# scoring where stopword removal must not be involved.
_BARE_CLEANING = CleaningConfig(stopword_list=frozenset())

_DEFAULT_CLEANING: CleaningConfig | None = None


def _default_cleaning() -> CleaningConfig:
    global _DEFAULT_CLEANING
    if _DEFAULT_CLEANING is None:
        _DEFAULT_CLEANING = CleaningConfig()
    return _DEFAULT_CLEANING


def deduplicate(
    records: Sequence[QARecord],
    embedder,
    threshold: float = 0.95,
) -> tuple[list[QARecord], DedupReport]:
    """Remove semantically duplicate questions.

    Records whose question embeddings reach cosine >= threshold are linked;
    groups are the transitive closure of those links. Within a group the
    survivor is the member with the highest mean similarity to the others,
    ties broken by longest answer, then lowest id. Survivors keep corpus
    order.
    """
    if not 0.0 < threshold <= 1.0:
        raise ConfigError(f"dedup threshold must be in (0, 1], got {threshold}")
    n = len(records)
    if n == 0:
        return [], DedupReport(groups=[], threshold_used=threshold)

    vectors = []
    for rec in records:
        try:
            vectors.append(embedder.embed_text(rec.question).values)
        except Exception as e:
            raise ProviderError(f"embedding failed for record {rec.id}: {e}") from e
    matrix = np.stack(vectors)
    sims = matrix @ matrix.T

    # union-find over threshold-crossing pairs
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges: list[tuple[int, int, float]] = []
    for i in range(n):
        for j in range(i + 1, n):
            s = float(sims[i, j])
            if s >= threshold:
                edges.append((i, j, s))
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    members: dict[int, list[int]] = {}
    for i in range(n):
        members.setdefault(find(i), []).append(i)

    removed: set[int] = set()
    groups: list[DedupGroup] = []
    for root in sorted(members, key=lambda r: min(members[r])):
        group = members[root]
        if len(group) < 2:
            continue
        best = None
        for i in group:
            mean_sim = sum(float(sims[i, j]) for j in group if j != i) / (len(group) - 1)
            key = (-mean_sim, -len(records[i].answer), records[i].id)
            if best is None or key < best[0]:
                best = (key, i)
        keeper = best[1]
        removed.update(i for i in group if i != keeper)
        group_set = set(group)
        groups.append(
            DedupGroup(
                kept_id=records[keeper].id,
                removed_ids=[records[i].id for i in group if i != keeper],
                similarities=[
                    (records[i].id, records[j].id, s)
                    for i, j, s in edges
                    if i in group_set and j in group_set
                ],
            )
        )
    kept = [rec for i, rec in enumerate(records) if i not in removed]
    return kept, DedupReport(groups=groups, threshold_used=threshold)


_SENTENCE_END_RE = re.compile(r"[.?!](?=\s|$)")


def split_sentences(text: str) -> list[str]:
    """Split on '.', '?' or '!' followed by whitespace or end of text.

    Each sentence is returned as a verbatim slice of the input, surrounding
    whitespace trimmed. A trailing fragment without terminal punctuation
    counts as a sentence.
    """
    sentences = []
    start = 0
    for m in _SENTENCE_END_RE.finditer(text):
        chunk = text[start : m.end()].strip()
        if chunk:
            sentences.append(chunk)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def summarize_answer(answer: str, max_sentences: int = 3) -> str:
    """Extractive summary: keep the top sentences by mean tf-idf weight.

    Term frequency is counted over the whole answer; document frequency is
    per sentence. Selected sentences are re-emitted in their original
    order. Answers at or under the limit are returned unchanged.
    """
    if max_sentences < 1:
        raise ConfigError(f"max_sentences must be >= 1, got {max_sentences}")
    sentences = split_sentences(answer)
    if len(sentences) <= max_sentences:
        return answer

    sent_tokens = [clean_text(s, _BARE_CLEANING).split() for s in sentences]
    tf = Counter(tok for toks in sent_tokens for tok in toks)
    df = Counter()
    for toks in sent_tokens:
        df.update(set(toks))
    n_sent = len(sentences)

    def score(toks: list[str]) -> float:
        if not toks:
            return 0.0
        total = sum(tf[t] * math.log(n_sent / df[t]) for t in toks)
        return total / len(toks)

    ranked = sorted(range(n_sent), key=lambda i: (-score(sent_tokens[i]), i))
    chosen = sorted(ranked[:max_sentences])
    return " ".join(sentences[i] for i in chosen)


def stratified_split(records: Sequence[QARecord], ratio: float, seed: int) -> SplitCorpus:
    """Split per category so train proportions stay within one record of
    the requested ratio; the global train size is round(ratio * N).

    Extra slots left by the per-category floor are handed out by largest
    fractional remainder. Selection inside a category is a seeded shuffle,
    so the split is deterministic for a fixed seed.
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must be in (0, 1), got {ratio}")
    for rec in records:
        if not rec.category:
            raise ConfigError(f"record {rec.id} has no category")

    by_cat: dict[str, list[int]] = {}
    for i, rec in enumerate(records):
        by_cat.setdefault(rec.category, []).append(i)

    n_total = len(records)
    target_train = math.floor(ratio * n_total + 0.5)

    cats = sorted(by_cat)
    base = {c: math.floor(ratio * len(by_cat[c])) for c in cats}
    deficit = target_train - sum(base.values())
    remainders = sorted(
        cats, key=lambda c: (-(ratio * len(by_cat[c]) - base[c]), c)
    )
    bumped = set(remainders[:deficit])

    rng = random.Random(seed)
    train_idx: set[int] = set()
    for c in cats:
        take = base[c] + (1 if c in bumped else 0)
        pool = list(by_cat[c])
        rng.shuffle(pool)
        train_idx.update(pool[:take])

    train = [rec for i, rec in enumerate(records) if i in train_idx]
    test = [rec for i, rec in enumerate(records) if i not in train_idx]
    return SplitCorpus(train=train, test=test, seed=seed, ratio=ratio)


def write_jsonl(records: Iterable[QARecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")
