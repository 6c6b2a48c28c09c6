"""HTTP service contract: routes, status codes, stats, CORS, hot swap."""

import http.client
import json
import threading

import pytest

from qabot import CONFIDENCE_TIERS, build_engine, create_server
from conftest import request_json, toy_records

CHAT_KEYS = {
    "answer_id",
    "answer",
    "matched_question_id",
    "matched_question_text",
    "similarity",
    "q_value",
    "blended_score",
    "confidence",
    "latency_ms",
}


@pytest.fixture()
def port(server) -> int:
    return server.server_port


@pytest.fixture()
def bare_server():
    """Function-scoped server with no engine, for 503 and swap scenarios."""
    srv = create_server(port=0, engine=None)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def request_full(port, method, path, payload=None):
    """Like request_json but also returns the response headers."""
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
        return resp.status, dict(resp.getheaders()), json.loads(raw) if raw else None
    finally:
        conn.close()


def test_health_reports_loaded_bundle(port):
    status, body = request_json(port, "GET", "/v1/health")
    assert status == 200
    assert body == {"status": "ok", "bundle_loaded": True}


def test_health_without_bundle(bare_server):
    status, body = request_json(bare_server.server_port, "GET", "/v1/health")
    assert status == 200
    assert body == {"status": "ok", "bundle_loaded": False}


def test_chat_answers_exact_question(port, engine):
    rec = engine.corpus[0]
    status, body = request_json(port, "POST", "/v1/chat", {"question": rec.question})
    assert status == 200
    assert set(body) == CHAT_KEYS
    assert body["answer_id"] == rec.id
    assert body["answer"] == rec.answer
    assert body["matched_question_id"] == rec.id
    assert body["confidence"] == "relevant"
    assert body["latency_ms"] > 0


def test_chat_echoes_session_id(port, engine):
    payload = {"question": engine.corpus[1].question, "session_id": "abc-123"}
    status, body = request_json(port, "POST", "/v1/chat", payload)
    assert status == 200
    assert body["session_id"] == "abc-123"


def test_chat_rejects_malformed_json(port):
    status, body = request_json(port, "POST", "/v1/chat", b"{not json")
    assert status == 400
    assert body["error"] == "bad_request"


def test_chat_requires_question_field(port):
    status, body = request_json(port, "POST", "/v1/chat", {"q": "hello"})
    assert status == 400
    assert body["error"] == "missing_field"
    assert "question" in body["message"]


def test_chat_rejects_non_string_question(port):
    status, body = request_json(port, "POST", "/v1/chat", {"question": 7})
    assert status == 400
    assert body["error"] == "bad_request"


def test_chat_rejects_non_object_body(port):
    status, body = request_json(port, "POST", "/v1/chat", ["question"])
    assert status == 400
    assert body["error"] == "bad_request"


def test_chat_degenerate_question(port):
    status, body = request_json(port, "POST", "/v1/chat", {"question": "?! ... !!"})
    assert status == 422
    assert body["error"] == "degenerate_input"


def test_unknown_routes_are_404(port):
    for method in ("GET", "POST"):
        status, body = request_json(port, method, "/v1/nope", {"x": 1})
        assert status == 404
        assert body["error"] == "not_found"


def test_chat_without_bundle_is_503(bare_server):
    status, body = request_json(
        bare_server.server_port, "POST", "/v1/chat", {"question": "anything"}
    )
    assert status == 503
    assert body["error"] == "no_bundle"


def test_swap_engine_takes_effect_between_requests(bare_server):
    port = bare_server.server_port
    engine, _ = build_engine(toy_records())
    question = engine.corpus[0].question

    status, _ = request_json(port, "POST", "/v1/chat", {"question": question})
    assert status == 503
    bare_server.swap_engine(engine)
    status, body = request_json(port, "POST", "/v1/chat", {"question": question})
    assert status == 200
    assert body["answer_id"] == engine.corpus[0].id
    bare_server.swap_engine(None)
    status, _ = request_json(port, "POST", "/v1/chat", {"question": question})
    assert status == 503


def test_stats_counts_every_chat_post(port, engine):
    _, before = request_json(port, "GET", "/v1/stats")
    for rec in engine.corpus[:3]:
        request_json(port, "POST", "/v1/chat", {"question": rec.question})
    request_json(port, "POST", "/v1/chat", {"q": "missing"})
    request_json(port, "POST", "/v1/chat", {"question": "?!"})
    _, after = request_json(port, "GET", "/v1/stats")

    assert after["requests"] - before["requests"] == 5
    tier_delta = sum(after["tiers"][t] - before["tiers"][t] for t in CONFIDENCE_TIERS)
    assert tier_delta == 3  # only 200s are attributed to a tier
    assert after["tiers"]["relevant"] - before["tiers"]["relevant"] == 3
    assert after["corpus_size"] == len(engine)
    assert 0 <= after["latency_ms"]["p50"] <= after["latency_ms"]["p95"]


def test_cors_header_everywhere(port):
    for method, path, payload in (
        ("GET", "/v1/health", None),
        ("GET", "/v1/nowhere", None),
        ("POST", "/v1/chat", {"q": "missing"}),
    ):
        _, headers, _ = request_full(port, method, path, payload)
        assert headers["Access-Control-Allow-Origin"] == "*"


def test_custom_cors_origin():
    srv = create_server(port=0, engine=None, cors_origin="http://localhost:5173")
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    try:
        _, headers, _ = request_full(srv.server_port, "GET", "/v1/health")
        assert headers["Access-Control-Allow-Origin"] == "http://localhost:5173"
    finally:
        srv.shutdown()
        srv.server_close()


def test_options_preflight(port):
    status, headers, body = request_full(port, "OPTIONS", "/v1/chat")
    assert status == 204
    assert body is None
    assert "POST" in headers["Access-Control-Allow-Methods"]
    assert headers["Access-Control-Allow-Origin"] == "*"


def test_error_responses_close_the_connection(port):
    _, headers, _ = request_full(port, "POST", "/v1/chat", {"q": "missing"})
    assert headers["Connection"] == "close"


def test_concurrent_chat_smoke(port, engine):
    records = engine.corpus[:8]
    failures = []

    def worker(rec):
        for _ in range(5):
            status, body = request_json(port, "POST", "/v1/chat", {"question": rec.question})
            if status != 200 or body["answer_id"] != rec.id:
                failures.append((rec.id, status, body))

    threads = [threading.Thread(target=worker, args=(rec,)) for rec in records]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not failures
