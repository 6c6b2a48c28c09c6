"""Functional evaluation: scenario files, batch scoring, paraphrase generation.

A scenario pairs a question with the set of record ids accepted as a
correct answer. The report tracks two independent measures: semantic
accuracy (fraction of answers tiered "relevant") and hit rate (fraction
whose answer id landed in the expected set). Neither bounds the other.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .errors import ConfigError, SchemaError, ValidationError
from .inference import CONFIDENCE_TIERS, InferenceConfig, answer_query


def percentile(values, q: float) -> float:
    """Nearest-rank percentile; 0.0 on empty input."""
    if not values:
        return 0.0
    ordered = sorted(values)
    rank = max(1, math.ceil(q / 100.0 * len(ordered)))
    return float(ordered[rank - 1])


@dataclass(frozen=True)
class EvalScenario:
    question: str
    expected_ids: frozenset[str]
    note: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "expected_ids", frozenset(self.expected_ids))
        if not self.expected_ids:
            raise SchemaError(f"scenario {self.question!r} has no expected_ids")

    def to_json(self) -> dict:
        out = {"question": self.question, "expected_ids": sorted(self.expected_ids)}
        if self.note is not None:
            out["note"] = self.note
        return out

    @classmethod
    def from_json(cls, payload: dict) -> "EvalScenario":
        if not isinstance(payload, dict):
            raise SchemaError("scenario must be a JSON object")
        question = payload.get("question")
        expected = payload.get("expected_ids")
        if not isinstance(question, str) or not question:
            raise SchemaError("scenario needs a non-empty string field 'question'")
        if (
            not isinstance(expected, list)
            or not expected
            or not all(isinstance(x, str) for x in expected)
        ):
            raise SchemaError("scenario needs a non-empty string list 'expected_ids'")
        note = payload.get("note")
        if note is not None and not isinstance(note, str):
            raise SchemaError("scenario field 'note' must be a string when present")
        return cls(question=question, expected_ids=frozenset(expected), note=note)


def load_scenarios(path) -> list[EvalScenario]:
    scenarios = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except ValueError as e:
                raise SchemaError(f"scenario file line {i + 1} is not valid JSON: {e}") from e
            scenarios.append(EvalScenario.from_json(payload))
    return scenarios


def write_scenarios(scenarios: Sequence[EvalScenario], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sc in scenarios:
            fh.write(json.dumps(sc.to_json(), sort_keys=True, separators=(",", ":")))
            fh.write("\n")


@dataclass
class EvalReport:
    n_scenarios: int
    tiers: dict[str, int]
    semantic_accuracy: float
    hit_rate: float
    latency_p50_ms: float
    latency_p95_ms: float

    def to_json(self) -> dict:
        return {
            "n_scenarios": self.n_scenarios,
            "tiers": dict(self.tiers),
            "semantic_accuracy": self.semantic_accuracy,
            "hit_rate": self.hit_rate,
            "latency_p50_ms": self.latency_p50_ms,
            "latency_p95_ms": self.latency_p95_ms,
        }

    def render_table(self) -> str:
        lines = [
            f"scenarios          {self.n_scenarios}",
            f"semantic accuracy  {self.semantic_accuracy:.3f}",
            f"hit rate           {self.hit_rate:.3f}",
            f"latency p50 / p95  {self.latency_p50_ms:.1f} ms / {self.latency_p95_ms:.1f} ms",
        ]
        for tier in CONFIDENCE_TIERS:
            lines.append(f"  {tier:<17}{self.tiers.get(tier, 0)}")
        return "\n".join(lines)


def run_eval(
    scenarios: Sequence[EvalScenario], engine, cfg: InferenceConfig | None = None
) -> EvalReport:
    """Score every scenario against the engine.

    All expected ids are validated against the corpus before the first
    query runs, so a bad scenario file fails fast instead of mid-run.
    Sequential and deterministic for a fixed engine.
    """
    if not scenarios:
        raise ValidationError("no scenarios to evaluate")
    known = set(engine.position_of)
    for sc in scenarios:
        missing = sc.expected_ids - known
        if missing:
            raise ValidationError(
                f"scenario {sc.question!r} expects unknown record ids: {sorted(missing)}"
            )

    tiers = {tier: 0 for tier in CONFIDENCE_TIERS}
    hits = 0
    latencies = []
    for sc in scenarios:
        result = answer_query(sc.question, engine, cfg)
        tiers[result.confidence] += 1
        if result.answer_id in sc.expected_ids:
            hits += 1
        latencies.append(result.latency_ms)
    n = len(scenarios)
    return EvalReport(
        n_scenarios=n,
        tiers=tiers,
        semantic_accuracy=tiers["relevant"] / n,
        hit_rate=hits / n,
        latency_p50_ms=percentile(latencies, 50),
        latency_p95_ms=percentile(latencies, 95),
    )


def generate_paraphrases(
    corpus,
    per_question: int = 1,
    dropout: float = 0.15,
    synonym_table: Mapping[str, str] | None = None,
    seed: int = 42,
    limit: Optional[int] = None,
    stopwords: frozenset[str] = frozenset(),
) -> list[EvalScenario]:
    """Emit seeded paraphrase scenarios, expected id = the source record.

    Source questions are visited in a seeded shuffle (so a limit samples
    the corpus rather than truncating it). Within a variant each
    non-stopword token independently: dropped with probability `dropout`,
    else replaced via the synonym table when it has an entry. A variant
    that comes out unchanged falls back to rotating the token order by
    one, keeping every variant at least one token away from its source.
    """
    if not 0 <= dropout <= 0.3:
        raise ConfigError(f"dropout must be in [0, 0.3], got {dropout}")
    if per_question < 1:
        raise ConfigError(f"per_question must be >= 1, got {per_question}")
    synonym_table = dict(synonym_table) if synonym_table else {}

    rng = random.Random(seed)
    order = list(range(len(corpus)))
    rng.shuffle(order)

    scenarios = []
    for idx in order:
        rec = corpus[idx]
        words = rec.question.split()
        for v in range(per_question):
            if limit is not None and len(scenarios) >= limit:
                return scenarios
            variant = []
            changed = False
            for word in words:
                lowered = word.lower()
                if lowered in stopwords:
                    variant.append(word)
                    continue
                coin = rng.random()
                if coin < dropout:
                    changed = True
                    continue
                if lowered in synonym_table:
                    variant.append(synonym_table[lowered])
                    changed = True
                else:
                    variant.append(word)
            if not changed or not variant:
                variant = words[1:] + words[:1]
            scenarios.append(
                EvalScenario(
                    question=" ".join(variant),
                    expected_ids=frozenset({rec.id}),
                    note=f"paraphrase {v + 1} of {rec.id}",
                )
            )
    return scenarios
