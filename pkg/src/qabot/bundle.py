"""Engine assembly and on-disk bundle persistence.

A bundle is a directory of exactly four files: manifest.json (config,
idf table, checksums), corpus.jsonl (the training records), embeddings.json
(question vectors, array-of-arrays) and qtable.json (learned values). All
JSON is emitted with sorted keys and fixed separators and carries no
timestamps, so saving the same engine twice yields byte-identical files.
Floats are written in shortest-roundtrip decimal form, which the JSON
parser maps back to the exact same doubles; a loaded engine therefore
reproduces bit-identical inference outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import CleaningConfig, QARecord
from .embedding import (
    HASH_ALGORITHM,
    HASH_PERSON,
    SIGN_BIT,
    UNIT_NORM_TOL,
    EmbeddingConfig,
    ExternalHttpEmbedder,
    HashedTfidfEmbedder,
    VectorIndex,
    build_index,
)
from .errors import (
    BundleChecksumError,
    BundleConsistencyError,
    BundleError,
    BundleMissingFileError,
    BundleVersionError,
    ConfigError,
)
from .inference import InferenceConfig
from .qlearn import QTable, RewardSpec, TrainingConfig, TrainingReport, train

FORMAT_VERSION = 1
MANIFEST_FILE = "manifest.json"
CORPUS_FILE = "corpus.jsonl"
EMBEDDINGS_FILE = "embeddings.json"
QTABLE_FILE = "qtable.json"
DATA_FILES = (CORPUS_FILE, EMBEDDINGS_FILE, QTABLE_FILE)


@dataclass
class Engine:
    """Loaded, immutable inference state; safe for concurrent reads."""

    corpus: list[QARecord]
    index: VectorIndex
    qtable: QTable
    embedder: object
    reward_spec: RewardSpec
    training_config: TrainingConfig
    inference_config: InferenceConfig
    position_of: dict[str, int] = field(init=False)

    def __post_init__(self) -> None:
        n = len(self.corpus)
        if not (len(self.index) == n == self.qtable.n_states == self.qtable.n_actions):
            raise BundleConsistencyError(
                f"corpus ({n}), index ({len(self.index)}) and qtable "
                f"({self.qtable.n_states}x{self.qtable.n_actions}) sizes disagree"
            )
        if [rec.id for rec in self.corpus] != list(self.index.ids):
            raise BundleConsistencyError("corpus and index record ids disagree")
        self.position_of = {rec.id: i for i, rec in enumerate(self.corpus)}

    def __len__(self) -> int:
        return len(self.corpus)


def build_engine(
    corpus: Sequence[QARecord],
    cleaning: CleaningConfig | None = None,
    embedding_config: EmbeddingConfig | None = None,
    reward_spec: RewardSpec | None = None,
    training_config: TrainingConfig | None = None,
    inference_config: InferenceConfig | None = None,
) -> tuple[Engine, TrainingReport]:
    """Embed the corpus, train the table, assemble a ready engine."""
    if not corpus:
        raise ConfigError("cannot build an engine over an empty corpus")
    reward_spec = reward_spec if reward_spec is not None else RewardSpec()
    training_config = training_config if training_config is not None else TrainingConfig()
    inference_config = inference_config if inference_config is not None else InferenceConfig()
    embedder = HashedTfidfEmbedder(config=embedding_config, cleaning=cleaning)
    index = build_index(corpus, embedder)
    qtable, report = train(corpus, index, reward_spec, training_config)
    engine = Engine(
        corpus=list(corpus),
        index=index,
        qtable=qtable,
        embedder=embedder,
        reward_spec=reward_spec,
        training_config=training_config,
        inference_config=inference_config,
    )
    return engine, report


def _dumps(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _cleaning_to_json(cleaning: CleaningConfig) -> dict:
    return {
        "lowercase": cleaning.lowercase,
        "strip_markup": cleaning.strip_markup,
        "strip_non_alphabetic_symbols": cleaning.strip_non_alphabetic_symbols,
        "stopwords": sorted(cleaning.stopword_list),
        "stem_rules": [[suffix, repl] for suffix, repl in cleaning.stem_rules],
    }


def _cleaning_from_json(payload: dict) -> CleaningConfig:
    return CleaningConfig(
        lowercase=payload["lowercase"],
        strip_markup=payload["strip_markup"],
        strip_non_alphabetic_symbols=payload["strip_non_alphabetic_symbols"],
        stopword_list=frozenset(payload["stopwords"]),
        stem_rules=[(s, r) for s, r in payload["stem_rules"]],
    )


def _manifest_payload(engine: Engine, data_checksums: dict[str, str]) -> dict:
    emb = {
        "provider": "builtin_hash",
        "dim": engine.index.dim,
        "endpoint": None,
        "hash": {
            "algorithm": HASH_ALGORITHM,
            "person": HASH_PERSON.decode("ascii"),
            "sign_bit": SIGN_BIT,
        },
        "cleaning": None,
        "idf_table": {},
    }
    if isinstance(engine.embedder, HashedTfidfEmbedder):
        emb["cleaning"] = _cleaning_to_json(engine.embedder.cleaning)
        emb["idf_table"] = dict(engine.embedder.config.idf_table)
    elif isinstance(engine.embedder, ExternalHttpEmbedder):
        emb["provider"] = "external_http"
        emb["endpoint"] = engine.embedder.config.endpoint
    return {
        "format_version": FORMAT_VERSION,
        "embedding": emb,
        "reward": {
            "hi_threshold": engine.reward_spec.hi_threshold,
            "lo_threshold": engine.reward_spec.lo_threshold,
            "full_reward": engine.reward_spec.full_reward,
            "penalty": engine.reward_spec.penalty,
        },
        "training": {
            "alpha": engine.training_config.alpha,
            "gamma": engine.training_config.gamma,
            "epsilon": engine.training_config.epsilon,
            "episodes": engine.training_config.episodes,
            "convergence_tol": engine.training_config.convergence_tol,
            "seed": engine.training_config.seed,
        },
        "inference": {
            "top_k": engine.inference_config.top_k,
            "blend_weight": engine.inference_config.blend_weight,
            "tier_hi": engine.inference_config.tier_hi,
            "tier_lo": engine.inference_config.tier_lo,
        },
        "checksums": data_checksums,
    }


def save_bundle(engine: Engine, path) -> str:
    """Write the four bundle files; returns the manifest's sha256.

    Byte-deterministic: identical engine state yields identical files.
    """
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)

    corpus_bytes = b"".join(_dumps(rec.to_json()) + b"\n" for rec in engine.corpus)
    embeddings_bytes = _dumps([list(row) for row in engine.index.matrix])
    qtable_bytes = _dumps(engine.qtable.to_json())

    checksums = {
        CORPUS_FILE: _sha256(corpus_bytes),
        EMBEDDINGS_FILE: _sha256(embeddings_bytes),
        QTABLE_FILE: _sha256(qtable_bytes),
    }
    manifest_bytes = _dumps(_manifest_payload(engine, checksums))

    (out / CORPUS_FILE).write_bytes(corpus_bytes)
    (out / EMBEDDINGS_FILE).write_bytes(embeddings_bytes)
    (out / QTABLE_FILE).write_bytes(qtable_bytes)
    (out / MANIFEST_FILE).write_bytes(manifest_bytes)
    return _sha256(manifest_bytes)


def _read_json(path: Path, name: str):
    try:
        return json.loads(path.read_bytes().decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as e:
        raise BundleError(f"{name} is not valid JSON: {e}") from e


def load_bundle(path, embedding_endpoint: Optional[str] = None) -> Engine:
    """Load and fully validate a bundle directory.

    Raises distinct error kinds: missing file, unsupported format version,
    checksum mismatch (naming the file), and cross-file size inconsistency.
    An embedding_endpoint override switches the engine to the external
    provider regardless of what the bundle was saved with.
    """
    root = Path(path)
    for name in (MANIFEST_FILE,) + DATA_FILES:
        if not (root / name).is_file():
            raise BundleMissingFileError(f"bundle at {root} is missing {name}")

    manifest = _read_json(root / MANIFEST_FILE, MANIFEST_FILE)
    if not isinstance(manifest, dict):
        raise BundleError(f"{MANIFEST_FILE} must hold a JSON object")
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise BundleVersionError(
            f"bundle format version {version!r} unsupported (this build reads {FORMAT_VERSION})"
        )

    try:
        checksums = manifest["checksums"]
        emb = manifest["embedding"]
        reward = manifest["reward"]
        training = manifest["training"]
        inference = manifest["inference"]
    except KeyError as e:
        raise BundleError(f"{MANIFEST_FILE} is missing section {e}") from e

    raw = {}
    for name in DATA_FILES:
        data = (root / name).read_bytes()
        expected = checksums.get(name)
        if expected is None:
            raise BundleError(f"{MANIFEST_FILE} carries no checksum for {name}")
        actual = _sha256(data)
        if actual != expected:
            raise BundleChecksumError(
                f"{name} checksum mismatch: manifest says {expected}, file hashes to {actual}"
            )
        raw[name] = data

    hash_info = emb.get("hash", {})
    if (
        hash_info.get("algorithm") != HASH_ALGORITHM
        or hash_info.get("person") != HASH_PERSON.decode("ascii")
        or hash_info.get("sign_bit") != SIGN_BIT
    ):
        raise BundleVersionError(
            f"bundle was written with hashing scheme {hash_info!r}; this build uses "
            f"{HASH_ALGORITHM}/{HASH_PERSON.decode('ascii')}/bit {SIGN_BIT}"
        )

    records = []
    for i, line in enumerate(raw[CORPUS_FILE].decode("utf-8").splitlines()):
        if not line.strip():
            continue
        try:
            records.append(QARecord.from_json(json.loads(line)))
        except (ValueError, KeyError) as e:
            raise BundleError(f"{CORPUS_FILE} line {i + 1} is invalid: {e}") from e

    vectors = _read_json(root / EMBEDDINGS_FILE, EMBEDDINGS_FILE)
    matrix = np.asarray(vectors, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(records):
        raise BundleConsistencyError(
            f"{EMBEDDINGS_FILE} holds {matrix.shape[0] if matrix.ndim == 2 else '?'} vectors "
            f"for {len(records)} corpus records"
        )
    if emb.get("dim") != matrix.shape[1]:
        raise BundleConsistencyError(
            f"manifest dim {emb.get('dim')} but embeddings have dim {matrix.shape[1]}"
        )
    norms = np.linalg.norm(matrix, axis=1)
    if not np.all(np.abs(norms - 1.0) <= UNIT_NORM_TOL):
        raise BundleConsistencyError(f"{EMBEDDINGS_FILE} contains non-unit vectors")

    qtable = QTable.from_json(_read_json(root / QTABLE_FILE, QTABLE_FILE))

    if embedding_endpoint is not None:
        config = EmbeddingConfig(
            provider="external_http", dim=matrix.shape[1], endpoint=embedding_endpoint
        )
        embedder = ExternalHttpEmbedder(config)
    elif emb.get("provider") == "external_http":
        config = EmbeddingConfig(
            provider="external_http", dim=matrix.shape[1], endpoint=emb.get("endpoint")
        )
        embedder = ExternalHttpEmbedder(config)
    else:
        config = EmbeddingConfig(
            provider="builtin_hash",
            dim=matrix.shape[1],
            idf_table={t: float(v) for t, v in emb.get("idf_table", {}).items()},
        )
        cleaning = _cleaning_from_json(emb["cleaning"]) if emb.get("cleaning") else None
        embedder = HashedTfidfEmbedder(config=config, cleaning=cleaning)

    index = VectorIndex([rec.id for rec in records], matrix)
    try:
        reward_spec = RewardSpec(**reward)
        training_config = TrainingConfig(**training)
        inference_config = InferenceConfig(**inference)
    except TypeError as e:
        raise BundleError(f"{MANIFEST_FILE} config section is malformed: {e}") from e
    return Engine(
        corpus=records,
        index=index,
        qtable=qtable,
        embedder=embedder,
        reward_spec=reward_spec,
        training_config=training_config,
        inference_config=inference_config,
    )
