"""Embedding providers, cosine similarity and the brute-force vector index.

Two providers satisfy the same contract: a deterministic hashed tf-idf
embedder that needs no network or model weights, and a client for an
external HTTP embedding endpoint. Both emit unit-norm vectors; everything
downstream relies on that.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Protocol, Sequence, runtime_checkable

import numpy as np
import requests

from .corpus import CleaningConfig, QARecord, clean_text, tokenize_normalize
from .errors import ConfigError, DegenerateInputError, ProviderError

# Stable hashing constants; recorded in the bundle manifest so persisted
# indexes remain portable. Changing either invalidates existing bundles.
HASH_ALGORITHM = "blake2b-64"
HASH_PERSON = b"qabot.embed.v1"
SIGN_BIT = 63

UNIT_NORM_TOL = 1e-6
DEFAULT_DIM = 256


class EmbeddingVector:
    """Fixed-dimension unit-norm float64 vector."""

    __slots__ = ("values",)

    def __init__(self, values) -> None:
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise ConfigError(f"embedding must be one-dimensional, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ConfigError("embedding contains non-finite components")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise ConfigError(f"embedding is not unit-norm (|v| = {norm!r})")
        arr.setflags(write=False)
        self.values = arr

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def __repr__(self) -> str:
        return f"EmbeddingVector(dim={self.dim})"


@dataclass
class EmbeddingConfig:
    provider: str = "builtin_hash"
    dim: int = DEFAULT_DIM
    endpoint: Optional[str] = None
    idf_table: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.provider not in ("builtin_hash", "external_http"):
            raise ConfigError(f"unknown embedding provider {self.provider!r}")
        if self.dim < 2:
            raise ConfigError(f"embedding dim must be >= 2, got {self.dim}")
        if (self.endpoint is not None) != (self.provider == "external_http"):
            raise ConfigError("endpoint must be set exactly when provider is external_http")


@runtime_checkable
class EmbeddingProvider(Protocol):
    dim: int

    def embed_text(self, text: str) -> EmbeddingVector: ...


def token_hash(token: str) -> int:
    """Stable 64-bit token hash (blake2b with a fixed person string)."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, person=HASH_PERSON).digest()
    return int.from_bytes(digest, "little")


def builtin_embed(tokens: Sequence[str], config: EmbeddingConfig) -> EmbeddingVector:
    """Hash tokens into signed buckets weighted by tf * idf, L2-normalized.

    Bucket is hash mod dim; sign is + when bit 63 of the hash is clear.
    Tokens missing from the idf table weigh zero, so input consisting only
    of unseen tokens raises DegenerateInputError.
    """
    acc = np.zeros(config.dim, dtype=np.float64)
    counts: dict[str, int] = {}
    for tok in tokens:
        counts[tok] = counts.get(tok, 0) + 1
    for tok, tf in counts.items():
        idf = config.idf_table.get(tok, 0.0)
        if idf == 0.0:
            continue
        h = token_hash(tok)
        sign = 1.0 if (h >> SIGN_BIT) & 1 == 0 else -1.0
        acc[h % config.dim] += sign * tf * idf
    norm = float(np.linalg.norm(acc))
    if norm == 0.0:
        raise DegenerateInputError("no token carries weight; cannot embed")
    return EmbeddingVector(acc / norm)


def compute_idf_table(token_docs: Iterable[Sequence[str]]) -> dict[str, float]:
    """Smoothed idf over token documents: ln((1 + N) / (1 + df)) + 1.

    Every token seen at least once gets a strictly positive weight.
    """
    df: dict[str, int] = {}
    n_docs = 0
    for doc in token_docs:
        n_docs += 1
        for tok in set(doc):
            df[tok] = df.get(tok, 0) + 1
    return {tok: math.log((1 + n_docs) / (1 + d)) + 1.0 for tok, d in df.items()}


class HashedTfidfEmbedder:
    """Deterministic offline provider: cleaning, tokenization, hashed tf-idf.

    fit() must run before embedding; it derives the idf table from the
    corpus questions. Same text always yields the bit-identical vector.
    """

    def __init__(
        self,
        config: EmbeddingConfig | None = None,
        cleaning: CleaningConfig | None = None,
    ) -> None:
        self.config = config if config is not None else EmbeddingConfig()
        if self.config.provider != "builtin_hash":
            raise ConfigError("HashedTfidfEmbedder requires provider 'builtin_hash'")
        self.cleaning = cleaning if cleaning is not None else CleaningConfig()
        # a config carrying an idf table (e.g. read back from disk) is fitted
        self._fitted = bool(self.config.idf_table)

    @property
    def dim(self) -> int:
        return self.config.dim

    @property
    def fitted(self) -> bool:
        return self._fitted

    def tokenize(self, text: str) -> list[str]:
        return tokenize_normalize(clean_text(text, self.cleaning), self.cleaning)

    def fit(self, texts: Iterable[str]) -> None:
        table = compute_idf_table(self.tokenize(t) for t in texts)
        self.config = replace(self.config, idf_table=table)
        self._fitted = True

    def embed_text(self, text: str) -> EmbeddingVector:
        if not self.fitted:
            raise ProviderError("embedder has no idf table; call fit() first")
        tokens = self.tokenize(text)
        if not tokens:
            raise DegenerateInputError("text is empty after cleaning")
        return builtin_embed(tokens, self.config)

    def embed_batch(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return [self.embed_text(t) for t in texts]


class ExternalHttpEmbedder:
    """Client for an external embedding service.

    POSTs {"texts": [...]} to {endpoint}/embed and expects
    {"vectors": [[...], ...], "dim": int}. Vectors are re-normalized at
    this boundary regardless of what the service returns.
    """

    def __init__(self, config: EmbeddingConfig, timeout: float = 10.0) -> None:
        if config.provider != "external_http":
            raise ConfigError("ExternalHttpEmbedder requires provider 'external_http'")
        self.config = config
        self.timeout = timeout

    @property
    def dim(self) -> int:
        return self.config.dim

    def embed_text(self, text: str) -> EmbeddingVector:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        url = f"{self.config.endpoint.rstrip('/')}/embed"
        started = time.monotonic()
        try:
            resp = requests.post(url, json={"texts": list(texts)}, timeout=self.timeout)
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as e:
            elapsed = time.monotonic() - started
            raise ProviderError(
                f"embedding provider at {url} failed after {elapsed:.2f}s: {e}"
            ) from e
        vectors = payload.get("vectors")
        dim = payload.get("dim")
        if vectors is None or dim is None:
            raise ProviderError(f"provider at {url} returned a malformed payload")
        if dim != self.config.dim:
            raise ProviderError(
                f"provider returned dim {dim}, config expects {self.config.dim}"
            )
        if len(vectors) != len(texts):
            raise ProviderError(
                f"provider returned {len(vectors)} vectors for {len(texts)} texts"
            )
        out = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.config.dim,):
                raise ProviderError(
                    f"provider returned a vector of dim {arr.shape}, expected {self.config.dim}"
                )
            norm = float(np.linalg.norm(arr))
            if norm == 0.0 or not np.all(np.isfinite(arr)):
                raise ProviderError("provider returned a zero or non-finite vector")
            out.append(EmbeddingVector(arr / norm))
        return out


def cosine_similarity(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """Dot product of unit vectors; symmetric, unclamped."""
    if u.dim != v.dim:
        raise ConfigError(f"dimension mismatch: {u.dim} vs {v.dim}")
    score = float(u.values @ v.values)
    if not -1.0 - 1e-9 <= score <= 1.0 + 1e-9:
        raise ConfigError(f"cosine {score!r} outside [-1, 1]; inputs are not unit vectors")
    return score


class VectorIndex:
    """Exhaustive cosine index over question embeddings, in corpus order."""

    def __init__(self, ids: Sequence[str], matrix: np.ndarray) -> None:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ConfigError("index matrix must be 2-D")
        if len(ids) != matrix.shape[0]:
            raise ConfigError("id count and matrix rows disagree")
        if len(set(ids)) != len(ids):
            raise ConfigError("index ids must be unique")
        self.ids = list(ids)
        self.matrix = matrix
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def vector(self, position: int) -> EmbeddingVector:
        return EmbeddingVector(self.matrix[position])


def build_index(corpus: Sequence[QARecord], provider) -> VectorIndex:
    """Embed every record's question, in corpus order.

    A fittable provider (the builtin one) is refit on this corpus first so
    its idf table matches what gets persisted alongside the index.
    """
    if not corpus:
        raise ConfigError("cannot build an index over an empty corpus")
    questions = [rec.question for rec in corpus]
    if hasattr(provider, "fit"):
        provider.fit(questions)
    rows = []
    for rec in corpus:
        try:
            rows.append(provider.embed_text(rec.question).values)
        except DegenerateInputError as e:
            raise DegenerateInputError(f"record {rec.id}: {e}") from e
        except ProviderError as e:
            raise ProviderError(f"embedding failed for record {rec.id}: {e}") from e
    return VectorIndex([rec.id for rec in corpus], np.stack(rows))


def query_index(
    index: VectorIndex, query: EmbeddingVector, k: int
) -> list[tuple[str, float]]:
    """Top-k ids by cosine score, descending; ties keep corpus order."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if query.dim != index.dim:
        raise ConfigError(f"dimension mismatch: query {query.dim}, index {index.dim}")
    scores = index.matrix @ query.values
    k = min(k, len(index))
    order = sorted(range(len(index)), key=lambda i: (-scores[i], i))[:k]
    return [(index.ids[i], float(scores[i])) for i in order]
