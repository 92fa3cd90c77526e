import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest


class StubEndpoint:
    """Minimal chat-completions server; `behavior` decides each response."""

    def __init__(self, behavior):
        self.behavior = behavior
        self.requests = []

        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                stub.requests.append(
                    {"path": self.path, "body": body, "headers": dict(self.headers)}
                )
                action = stub.behavior(body)
                if action.get("sleep"):
                    time.sleep(action["sleep"])
                status = action.get("status", 200)
                if "raw" in action:
                    payload = action["raw"].encode()
                else:
                    payload = json.dumps(
                        {"choices": [{"message": {"content": action.get("text", "")}}]}
                    ).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base_url(self):
        host, port = self.server.server_address
        return f"http://{host}:{port}/v1"

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def stub_endpoint():
    created = []

    def factory(behavior):
        if isinstance(behavior, str):
            text = behavior
            behavior = lambda body: {"text": text}
        stub = StubEndpoint(behavior)
        created.append(stub)
        return stub

    yield factory
    for stub in created:
        stub.close()
