from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from mcidx.corpus import build_document
from mcidx.providers import LlmClient


class ScriptedLlm(LlmClient):
    """Returns queued responses (or a handler's output) and records prompts."""

    name = "scripted"

    def __init__(self, responses=None, handler=None):
        self.responses = list(responses or [])
        self.handler = handler
        self.prompts: list[str] = []

    def generate(self, prompt: str, max_tokens: int = 1024) -> str:
        self.prompts.append(prompt)
        if self.handler is not None:
            return self.handler(prompt)
        if not self.responses:
            raise AssertionError("ScriptedLlm ran out of responses")
        return self.responses.pop(0)


class RefusingLlm(LlmClient):
    """Fails the test if any call reaches it."""

    name = "refusing"

    def generate(self, prompt: str, max_tokens: int = 1024) -> str:
        raise AssertionError("LLM was called but no call was expected")


class StubServer:
    """Tiny JSON-over-POST endpoint with a scriptable response queue.

    Responses come from ``responder(path, payload)`` when set, else from the
    ``queue``, else ``default``.
    """

    def __init__(self):
        self.requests: list[tuple[str, dict, dict]] = []
        self.queue: list[tuple[int, object]] = []
        self.default: tuple[int, object] = (200, {"text": "ok"})
        self.responder = None
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"{}")
                outer.requests.append((self.path, payload, dict(self.headers)))
                if outer.responder is not None:
                    status, body = outer.responder(self.path, payload)
                else:
                    status, body = outer.queue.pop(0) if outer.queue else outer.default
                data = (body if isinstance(body, str) else json.dumps(body)).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self) -> str:
        host, port = self.server.server_address
        return f"http://{host}:{port}"

    def stop(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def stub():
    server = StubServer()
    yield server
    server.stop()


@pytest.fixture
def scripted_llm():
    return ScriptedLlm


def make_doc(section_texts, doc_id="doc", headings=None, levels=None):
    """Document from bare section texts, ids s0000, s0001, ..."""
    sections = []
    for i, text in enumerate(section_texts):
        heading = headings[i] if headings else f"Heading {i}"
        level = levels[i] if levels else 1
        sections.append((f"s{i:04d}", heading, level, text))
    return build_document(doc_id, f"Title of {doc_id}", sections)


def words(n, stem="w"):
    """n distinct filler words."""
    return " ".join(f"{stem}{i}" for i in range(n))
