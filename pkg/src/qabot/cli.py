"""Command-line entry point: ingest, train, eval, gen-paraphrases, serve, ask.

Exit codes: 0 success, 1 input validation failure (bad data, bad
scenario, degenerate question), 2 io or configuration failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .bundle import build_engine, load_bundle, save_bundle
from .corpus import (
    CleaningConfig,
    FilterRules,
    deduplicate,
    filter_records,
    load_raw,
    load_stem_rules,
    load_stopwords,
    stratified_split,
    summarize_answer,
    write_jsonl,
)
from .embedding import HashedTfidfEmbedder
from .errors import (
    BundleError,
    ConfigError,
    DegenerateInputError,
    ProviderError,
    SchemaError,
    ValidationError,
)
from .evalharness import generate_paraphrases, load_scenarios, run_eval, write_scenarios
from .inference import answer_query
from .qlearn import TrainingConfig
from .service import create_server

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO_CONFIG = 2


def _env(name: str, default):
    return os.environ.get(f"QABOT_{name}", default)


def _cleaning_from_flags(args) -> CleaningConfig:
    kwargs = {}
    if args.stopwords:
        kwargs["stopword_list"] = load_stopwords(args.stopwords)
    if args.stem_rules:
        kwargs["stem_rules"] = load_stem_rules(args.stem_rules)
    return CleaningConfig(**kwargs)


def cmd_ingest(args) -> int:
    cleaning = _cleaning_from_flags(args)
    fmt = args.format
    if fmt == "auto":
        fmt = "csv" if Path(args.infile).suffix.lower() == ".csv" else "jsonl"
    records = load_raw(args.infile, format=fmt)
    n_loaded = len(records)

    records, filter_report = filter_records(records, FilterRules())

    embedder = HashedTfidfEmbedder(cleaning=cleaning)
    embedder.fit(rec.question for rec in records)
    records, dedup_report = deduplicate(records, embedder, threshold=args.dedup_threshold)

    n_shortened = 0
    summarized = []
    for rec in records:
        short = summarize_answer(rec.answer, max_sentences=args.max_sentences)
        if short != rec.answer:
            n_shortened += 1
        summarized.append(dataclasses.replace(rec, answer=short))
    records = summarized

    split = stratified_split(records, ratio=args.ratio, seed=args.seed)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(split.train, out / "train.jsonl")
    write_jsonl(split.test, out / "test.jsonl")
    report = {
        "loaded": n_loaded,
        "filter": filter_report,
        "dedup": dedup_report.to_json(),
        "summarized": n_shortened,
        "split": {
            "ratio": args.ratio,
            "seed": args.seed,
            "train": len(split.train),
            "test": len(split.test),
        },
    }
    (out / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(json.dumps(report["split"] | {"out": str(out)}))
    return EXIT_OK


def _corpus_path(arg: str) -> Path:
    path = Path(arg)
    if path.is_dir():
        return path / "train.jsonl"
    return path


def cmd_train(args) -> int:
    records = load_raw(_corpus_path(args.corpus), format="jsonl")
    cfg = TrainingConfig(
        alpha=args.alpha,
        gamma=args.gamma,
        epsilon=args.epsilon,
        episodes=args.episodes,
        seed=args.seed,
    )
    engine, report = build_engine(records, training_config=cfg)
    checksum = save_bundle(engine, args.out)
    print(
        json.dumps(
            {
                "bundle": str(args.out),
                "manifest_sha256": checksum,
                "records": len(records),
                "converged": report.converged,
                "sweeps_run": report.sweeps_run,
                "final_max_delta": report.max_deltas[-1],
            }
        )
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    engine = load_bundle(args.bundle)
    scenarios = load_scenarios(args.scenarios)
    report = run_eval(scenarios, engine)
    print(json.dumps(report.to_json()))
    print(report.render_table(), file=sys.stderr)
    return EXIT_OK


def cmd_gen_paraphrases(args) -> int:
    engine = load_bundle(args.bundle)
    stopwords = frozenset()
    if isinstance(engine.embedder, HashedTfidfEmbedder):
        stopwords = engine.embedder.cleaning.stopword_list
    scenarios = generate_paraphrases(
        engine.corpus,
        per_question=args.n,
        dropout=args.dropout,
        seed=args.seed,
        limit=args.limit,
        stopwords=stopwords,
    )
    write_scenarios(scenarios, args.out)
    print(json.dumps({"scenarios": len(scenarios), "out": str(args.out)}))
    return EXIT_OK


def cmd_serve(args) -> int:
    engine = None
    if args.bundle:
        engine = load_bundle(args.bundle, embedding_endpoint=args.embedding_endpoint)
    server = create_server(
        host=args.host, port=args.port, engine=engine, cors_origin=args.cors_origin
    )
    print(
        f"listening on http://{args.host}:{server.server_port} "
        f"(bundle: {args.bundle or 'none'})",
        file=sys.stderr,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def cmd_ask(args) -> int:
    engine = load_bundle(args.bundle)
    result = answer_query(args.question, engine)
    print(json.dumps(result.to_json()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qabot", description="closed-domain QA engine: pipeline, training, serving"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, filter, dedup, summarize and split a raw corpus")
    p.add_argument("--in", dest="infile", required=True, help="raw corpus (csv or jsonl)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("auto", "csv", "jsonl"), default="auto")
    p.add_argument("--stopwords", help="stopword file, one token per line")
    p.add_argument("--stem-rules", help="suffix rules file, suffix=replacement per line")
    p.add_argument("--dedup-threshold", type=float, default=0.95)
    p.add_argument("--max-sentences", type=int, default=3)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="embed a train split and fit the answer policy")
    p.add_argument("--corpus", required=True, help="train.jsonl or an ingest output directory")
    p.add_argument("--out", required=True, help="bundle directory to write")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--episodes", type=int, default=50)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a scenario file against a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--scenarios", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen-paraphrases", help="emit seeded paraphrase scenarios")
    p.add_argument("--bundle", required=True)
    p.add_argument("--n", type=int, default=5, help="variants per source question")
    p.add_argument("--dropout", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--limit", type=int, default=None, help="cap on total scenarios")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_paraphrases)

    p = sub.add_parser("serve", help="run the HTTP consultation service")
    p.add_argument("--bundle", default=_env("BUNDLE", None))
    p.add_argument("--host", default=_env("HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(_env("PORT", 8080)))
    p.add_argument("--embedding-endpoint", default=_env("EMBEDDING_ENDPOINT", None))
    p.add_argument("--cors-origin", default=_env("CORS_ORIGIN", "*"))
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ask", help="answer one question from a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("question")
    p.set_defaults(func=cmd_ask)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ValidationError, DegenerateInputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, BundleError, ProviderError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO_CONFIG


if __name__ == "__main__":
    sys.exit(main())
