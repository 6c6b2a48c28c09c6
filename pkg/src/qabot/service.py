"""HTTP JSON consultation service over a loaded engine.

Endpoints: POST /v1/chat, GET /v1/health, GET /v1/stats. Thread-per-request
on the stdlib ThreadingHTTPServer; the engine is immutable after load and
swapped atomically, so each request sees exactly one engine version. Error
bodies are always JSON: {"error": code, "message": text}.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import DegenerateInputError, StateError
from .evalharness import percentile
from .inference import CONFIDENCE_TIERS, answer_query


class ServiceStats:
    """Chat-request counters; updated under a lock, snapshot is consistent."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._latencies: list[float] = []
        self._requests = 0
        self._tiers = {tier: 0 for tier in CONFIDENCE_TIERS}

    def record(self, latency_ms: float, tier: str | None) -> None:
        with self._lock:
            self._requests += 1
            self._latencies.append(latency_ms)
            if tier is not None:
                self._tiers[tier] += 1

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "requests": self._requests,
                "latency_ms": {
                    "p50": percentile(self._latencies, 50),
                    "p95": percentile(self._latencies, 95),
                },
                "tiers": dict(self._tiers),
            }


class QAServer(ThreadingHTTPServer):
    """ThreadingHTTPServer carrying the engine, stats and CORS origin."""

    daemon_threads = True

    def __init__(self, address, engine=None, cors_origin: str = "*") -> None:
        super().__init__(address, ChatHandler)
        self.engine = engine
        self.cors_origin = cors_origin
        self.stats = ServiceStats()

    def swap_engine(self, engine) -> None:
        # plain attribute rebind; handlers read it once per request
        self.engine = engine


class ChatHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    disable_nagle_algorithm = True  # keep-alive POSTs stall ~40 ms otherwise
    server: QAServer

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", self.server.cors_origin)
        if status >= 400:
            # the request body may be partly unread; keep-alive would desync
            self.send_header("Connection", "close")
            self.close_connection = True
        self.end_headers()
        self.wfile.write(body)

    def _send_error(self, status: int, code: str, message: str) -> None:
        self._send_json(status, {"error": code, "message": message})

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", self.server.cors_origin)
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        engine = self.server.engine
        if self.path == "/v1/health":
            self._send_json(200, {"status": "ok", "bundle_loaded": engine is not None})
        elif self.path == "/v1/stats":
            payload = self.server.stats.snapshot()
            payload["corpus_size"] = len(engine) if engine is not None else 0
            self._send_json(200, payload)
        else:
            self._send_error(404, "not_found", f"no route for GET {self.path}")

    def do_POST(self) -> None:
        if self.path != "/v1/chat":
            self._send_error(404, "not_found", f"no route for POST {self.path}")
            return
        started = time.perf_counter()
        engine = self.server.engine
        tier = None
        try:
            status, payload = self._handle_chat(engine)
            if status == 200:
                tier = payload["confidence"]
        except Exception as e:
            status = 500
            payload = {"error": "internal_error", "message": f"{type(e).__name__}: {e}"}
        finally:
            latency_ms = (time.perf_counter() - started) * 1000.0
            self.server.stats.record(latency_ms, tier)
        if status == 200:
            payload["latency_ms"] = latency_ms
        self._send_json(status, payload)

    def _handle_chat(self, engine) -> tuple[int, dict]:
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            return 400, {"error": "bad_request", "message": "invalid Content-Length"}
        try:
            request = json.loads(self.rfile.read(length).decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            return 400, {"error": "bad_request", "message": "body is not valid JSON"}
        if not isinstance(request, dict):
            return 400, {"error": "bad_request", "message": "body must be a JSON object"}
        question = request.get("question")
        if question is None:
            return 400, {"error": "missing_field", "message": 'field "question" is required'}
        if not isinstance(question, str):
            return 400, {"error": "bad_request", "message": '"question" must be a string'}
        if engine is None:
            return 503, {"error": "no_bundle", "message": "no engine bundle is loaded"}
        try:
            result = answer_query(question, engine)
        except DegenerateInputError as e:
            return 422, {"error": "degenerate_input", "message": str(e)}
        except StateError as e:
            return 503, {"error": "no_bundle", "message": str(e)}
        except Exception as e:  # anything else is a server fault
            return 500, {"error": "internal_error", "message": f"{type(e).__name__}: {e}"}
        payload = result.to_json()
        if "session_id" in request:
            payload["session_id"] = request["session_id"]
        return 200, payload


def create_server(
    host: str = "127.0.0.1", port: int = 8080, engine=None, cors_origin: str = "*"
) -> QAServer:
    """Bind a server; port 0 picks a free port (server.server_port tells which)."""
    return QAServer((host, port), engine=engine, cors_origin=cors_origin)
