"""Closed-domain QA engine.

Pipeline: raw corpus -> filter/dedup/summarize/split -> deterministic
hashed tf-idf embeddings -> tabular Q-learning answer policy -> blended
similarity/value inference, served over HTTP JSON.
"""

from .bundle import Engine, build_engine, load_bundle, save_bundle
from .corpus import (
    CleaningConfig,
    DedupReport,
    FilterRules,
    QARecord,
    SplitCorpus,
    clean_text,
    deduplicate,
    default_stopwords,
    filter_records,
    load_raw,
    load_stem_rules,
    load_stopwords,
    split_sentences,
    stratified_split,
    summarize_answer,
    tokenize_normalize,
    write_jsonl,
)
from .embedding import (
    EmbeddingConfig,
    EmbeddingVector,
    ExternalHttpEmbedder,
    HashedTfidfEmbedder,
    VectorIndex,
    build_index,
    builtin_embed,
    cosine_similarity,
    query_index,
)
from .errors import (
    BundleChecksumError,
    BundleConsistencyError,
    BundleError,
    BundleMissingFileError,
    BundleVersionError,
    ConfigError,
    DegenerateInputError,
    EngineError,
    ProviderError,
    SchemaError,
    StateError,
    ValidationError,
)
from .evalharness import (
    EvalReport,
    EvalScenario,
    generate_paraphrases,
    load_scenarios,
    percentile,
    run_eval,
    write_scenarios,
)
from .inference import (
    CONFIDENCE_TIERS,
    InferenceConfig,
    InferenceResult,
    answer_query,
    confidence_tier,
)
from .qlearn import (
    QTable,
    RewardSpec,
    TrainingConfig,
    TrainingReport,
    greedy_action,
    q_update,
    shape_reward,
    train,
)
from .service import QAServer, create_server

__version__ = "0.1.0"

__all__ = [
    "BundleChecksumError",
    "BundleConsistencyError",
    "BundleError",
    "BundleMissingFileError",
    "BundleVersionError",
    "CONFIDENCE_TIERS",
    "CleaningConfig",
    "ConfigError",
    "DedupReport",
    "DegenerateInputError",
    "EmbeddingConfig",
    "EmbeddingVector",
    "Engine",
    "EngineError",
    "EvalReport",
    "EvalScenario",
    "ExternalHttpEmbedder",
    "FilterRules",
    "HashedTfidfEmbedder",
    "InferenceConfig",
    "InferenceResult",
    "ProviderError",
    "QARecord",
    "QAServer",
    "QTable",
    "RewardSpec",
    "SchemaError",
    "SplitCorpus",
    "StateError",
    "TrainingConfig",
    "TrainingReport",
    "ValidationError",
    "VectorIndex",
    "answer_query",
    "build_engine",
    "build_index",
    "builtin_embed",
    "clean_text",
    "confidence_tier",
    "cosine_similarity",
    "create_server",
    "deduplicate",
    "default_stopwords",
    "filter_records",
    "generate_paraphrases",
    "greedy_action",
    "load_bundle",
    "load_raw",
    "load_scenarios",
    "load_stem_rules",
    "load_stopwords",
    "percentile",
    "q_update",
    "query_index",
    "run_eval",
    "save_bundle",
    "shape_reward",
    "split_sentences",
    "stratified_split",
    "summarize_answer",
    "tokenize_normalize",
    "train",
    "write_jsonl",
    "write_scenarios",
]
