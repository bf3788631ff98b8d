"""Translation clients for back-translation.

The wire contract is ``POST /translate`` with JSON ``{"text", "src", "tgt"}``
answered by ``{"text"}``. :class:`MockTranslationClient` implements the same
contract offline and :func:`make_server` exposes any client over HTTP.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import urllib.error
import urllib.request
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Protocol

logger = logging.getLogger(__name__)

ENDPOINT_ENV = "AUGPET_TRANSLATE_URL"


class TranslationError(RuntimeError):
    def __init__(self, message, example_id=None, pivot=None):
        super().__init__(message)
        self.example_id = example_id
        self.pivot = pivot


class TranslationClient(Protocol):
    def translate(self, text: str, src: str, tgt: str) -> str: ...


class HttpTranslationClient:
    def __init__(self, url: str, retries: int = 3, timeout: float = 30.0, backoff: float = 0.5):
        self.url = url.rstrip("/")
        self.retries = retries
        self.timeout = timeout
        self.backoff = backoff

    def translate(self, text, src, tgt):
        body = json.dumps({"text": text, "src": src, "tgt": tgt}).encode("utf-8")
        last = None
        for attempt in range(self.retries + 1):
            req = urllib.request.Request(
                self.url + "/translate",
                data=body,
                headers={"Content-Type": "application/json"},
                method="POST",
            )
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
                if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
                    raise TranslationError(f"malformed response from {self.url}: {payload!r}")
                return payload["text"]
            except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
                last = exc
                logger.warning("translate %s->%s attempt %d failed: %s", src, tgt, attempt + 1, exc)
                if attempt < self.retries:
                    time.sleep(self.backoff * 2**attempt)
        raise TranslationError(f"translation {src}->{tgt} failed after {self.retries + 1} attempts: {last}")


class MockTranslationClient:
    """Deterministic stand-in: table lookups first, then ``mode``.

    ``mode`` is ``"identity"`` (echo the input) or ``"reverse"`` (reverse
    the word order on every call, so a round trip restores the input).
    """

    def __init__(self, mode: str = "identity", table: dict | None = None):
        if mode not in ("identity", "reverse", "strict"):
            raise ValueError(f"unknown mock mode {mode!r}")
        self.mode = mode
        self.table = dict(table or {})

    @classmethod
    def from_file(cls, path) -> "MockTranslationClient":
        """Load ``{"mode": ..., "translations": [{"text", "src", "tgt", "out"}]}``."""
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        table = {(t["text"], t["src"], t["tgt"]): t["out"] for t in doc.get("translations", [])}
        return cls(doc.get("mode", "identity"), table)

    def translate(self, text, src, tgt):
        hit = self.table.get((text, src, tgt))
        if hit is not None:
            return hit
        if self.mode == "identity":
            return text
        if self.mode == "reverse":
            return " ".join(reversed(text.split(" ")))
        raise TranslationError(f"no mock translation for {src}->{tgt}: {text!r}")


class CachedTranslationClient:
    """Memoizes ``inner`` by ``(text, src, tgt)`` in an append-only JSONL file."""

    def __init__(self, inner: TranslationClient, path=None):
        self.inner = inner
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        self._cache: dict[tuple[str, str, str], str] = {}
        if self.path and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    row = json.loads(line)
                    self._cache[(row["text"], row["src"], row["tgt"])] = row["out"]

    def __len__(self):
        return len(self._cache)

    def translate(self, text, src, tgt):
        key = (text, src, tgt)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = self.inner.translate(text, src, tgt)
        with self._lock:
            if key not in self._cache:
                self._cache[key] = out
                if self.path:
                    with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                        row = {"text": text, "src": src, "tgt": tgt, "out": out}
                        fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        return self._cache[key]


def make_server(client: TranslationClient, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """An HTTP server answering ``POST /translate`` with ``client``."""

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            if self.path.rstrip("/") != "/translate":
                self.send_error(404)
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                req = json.loads(self.rfile.read(length).decode("utf-8"))
                out = client.translate(req["text"], req["src"], req["tgt"])
            except (KeyError, ValueError, TranslationError) as exc:
                self.send_error(400, str(exc))
                return
            body = json.dumps({"text": out}).encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    return ThreadingHTTPServer((host, port), Handler)
