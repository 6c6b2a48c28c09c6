"""Query answering: embed, match, blend similarity with learned Q-values.

The candidate answer set is the top-k index matches for the query. The
top-1 match plays the role of the query's state; its Q-row, min-max
normalized over the candidate set, is blended with raw similarity so
that value magnitudes (which depend on training length and discount)
cannot drown out semantic proximity.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .errors import ConfigError, StateError
from .embedding import query_index

CONFIDENCE_TIERS = ("relevant", "fairly_relevant", "not_relevant")


@dataclass(frozen=True)
class InferenceConfig:
    top_k: int = 10
    blend_weight: float = 0.7
    tier_hi: float = 0.8
    tier_lo: float = 0.5

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if not 0 <= self.blend_weight <= 1:
            raise ConfigError(f"blend_weight must be in [0, 1], got {self.blend_weight}")
        if not 0 < self.tier_lo < self.tier_hi <= 1:
            raise ConfigError(
                "tiers must satisfy 0 < tier_lo < tier_hi <= 1, got "
                f"lo={self.tier_lo}, hi={self.tier_hi}"
            )


@dataclass
class InferenceResult:
    answer_id: str
    answer_text: str
    matched_question_id: str
    matched_question_text: str
    similarity: float
    q_value: float
    blended_score: float
    confidence: str
    latency_ms: float

    def to_json(self) -> dict:
        return {
            "answer_id": self.answer_id,
            "answer": self.answer_text,
            "matched_question_id": self.matched_question_id,
            "matched_question_text": self.matched_question_text,
            "similarity": self.similarity,
            "q_value": self.q_value,
            "blended_score": self.blended_score,
            "confidence": self.confidence,
            "latency_ms": self.latency_ms,
        }


def confidence_tier(similarity: float, cfg: InferenceConfig) -> str:
    """Tier from semantic similarity alone; the blend never moves the tier."""
    if similarity > cfg.tier_hi:
        return "relevant"
    if similarity >= cfg.tier_lo:
        return "fairly_relevant"
    return "not_relevant"


def answer_query(question: str, engine, cfg: InferenceConfig | None = None) -> InferenceResult:
    """Answer one question against a loaded engine.

    The query is embedded and matched; the top-1 match supplies the state,
    the similarity, and the confidence tier. Each candidate's blended score
    is blend_weight * similarity + (1 - blend_weight) * normalized Q; ties
    break to the lowest corpus index. Deterministic for a fixed engine.
    """
    started = time.perf_counter()
    if engine is None:
        raise StateError("no engine loaded")
    if cfg is None:
        cfg = engine.inference_config

    query_vec = engine.embedder.embed_text(question)
    matches = query_index(engine.index, query_vec, cfg.top_k)

    positions = [engine.position_of[mid] for mid, _ in matches]
    sims = [score for _, score in matches]
    s_star = positions[0]

    q_raw = [engine.qtable.get(s_star, a) for a in positions]
    q_lo, q_hi = min(q_raw), max(q_raw)
    if q_hi > q_lo:
        q_norm = [(v - q_lo) / (q_hi - q_lo) for v in q_raw]
    else:
        q_norm = [0.0] * len(q_raw)

    blended = [
        cfg.blend_weight * sims[i] + (1 - cfg.blend_weight) * q_norm[i]
        for i in range(len(positions))
    ]
    chosen = min(range(len(positions)), key=lambda i: (-blended[i], positions[i]))

    answer_rec = engine.corpus[positions[chosen]]
    matched_rec = engine.corpus[s_star]
    top1_sim = float(sims[0])
    return InferenceResult(
        answer_id=answer_rec.id,
        answer_text=answer_rec.answer,
        matched_question_id=matched_rec.id,
        matched_question_text=matched_rec.question,
        similarity=top1_sim,
        q_value=float(engine.qtable.get(s_star, positions[chosen])),
        blended_score=float(blended[chosen]),
        confidence=confidence_tier(top1_sim, cfg),
        latency_ms=(time.perf_counter() - started) * 1000.0,
    )
