"""Shared fixtures: the trained fixture-corpus engine and a live server.

The 200-record engine is expensive enough (~2 s) to build once per
session; tests that need mutation or odd shapes build tiny corpora of
their own instead of touching the shared one.
"""

from __future__ import annotations

import http.client
import json
import threading
import time
from pathlib import Path

import pytest

from qabot import (
    HashedTfidfEmbedder,
    QARecord,
    build_engine,
    create_server,
    deduplicate,
    load_raw,
)

ROOT = Path(__file__).resolve().parent.parent
FIXTURE_PATH = ROOT / "data" / "fixture_corpus.jsonl"


@pytest.fixture(scope="session")
def fixture_records() -> list[QARecord]:
    return load_raw(FIXTURE_PATH, format="jsonl")


@pytest.fixture(scope="session")
def trained(fixture_records):
    """(engine, training report, train seconds) over the deduplicated fixture."""
    embedder = HashedTfidfEmbedder()
    embedder.fit(rec.question for rec in fixture_records)
    records, _ = deduplicate(fixture_records, embedder)
    started = time.perf_counter()
    engine, report = build_engine(records)
    seconds = time.perf_counter() - started
    return engine, report, seconds


@pytest.fixture(scope="session")
def engine(trained):
    return trained[0]


@pytest.fixture(scope="session")
def server(engine):
    srv = create_server(port=0, engine=engine)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def toy_records(n: int = 6) -> list[QARecord]:
    """Tiny corpus with pairwise-distinct topic words; answers pass filters."""
    topics = [
        ("wudu", "ablution", "ritual"),
        ("zakat", "charity", "wealth"),
        ("sawm", "fasting", "dawn"),
        ("hajj", "pilgrimage", "journey"),
        ("salat", "prayer", "direction"),
        ("nikah", "marriage", "contract"),
        ("riba", "interest", "lending"),
        ("tayammum", "sand", "substitute"),
    ]
    records = []
    for i in range(n):
        a, b, c = topics[i % len(topics)]
        records.append(
            QARecord(
                id=f"t_{i:02d}",
                question=f"How should {a} be performed regarding {b} and {c}?",
                answer=(
                    f"The practice of {a} concerns {b} and requires attention to {c}. "
                    "Scholars describe the steps in order and recommend consistency. "
                    "Communities teach this through study circles and careful repetition."
                ),
                category="fiqh_ibadah" if i % 2 == 0 else "muamalah",
            )
        )
    return records


@pytest.fixture()
def toy_engine():
    engine, _ = build_engine(toy_records())
    return engine


def request_json(port: int, method: str, path: str, payload=None):
    """One HTTP request against localhost:port; returns (status, parsed body)."""
    conn = http.client.HTTPConnection("127.0.0.1", port, timeout=10)
    try:
        body = None
        headers = {}
        if payload is not None:
            body = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
            headers["Content-Type"] = "application/json"
        conn.request(method, path, body=body, headers=headers)
        resp = conn.getresponse()
        raw = resp.read()
        return resp.status, json.loads(raw) if raw else None
    finally:
        conn.close()
