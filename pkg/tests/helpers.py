"""Local fixture HTTP server used across the suite."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable


@dataclass
class Reply:
    status: int = 200
    body: str | bytes = ""
    headers: dict[str, str] = field(default_factory=dict)
    delay: float = 0.0


Handler = Callable[[str], Reply]


class FixtureServer:
    """Serve ``handler(path) -> Reply`` on 127.0.0.1 and log every request."""

    def __init__(self, handler: Handler):
        self.handler = handler
        self.log: list[tuple[float, str]] = []
        self.user_agents: list[str] = []
        self._lock = threading.Lock()
        server = self

        class _H(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def do_GET(self):  # noqa: N802
                with server._lock:
                    server.log.append((time.monotonic(), self.path))
                    server.user_agents.append(self.headers.get("User-Agent", ""))
                reply = server.handler(self.path)
                if reply.delay:
                    time.sleep(reply.delay)
                body = reply.body.encode("utf-8") if isinstance(reply.body, str) else reply.body
                try:
                    self.send_response(reply.status)
                    for k, v in reply.headers.items():
                        self.send_header(k, v)
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                except (BrokenPipeError, ConnectionResetError):
                    pass

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), _H)
        self.httpd.daemon_threads = True
        self.thread = threading.Thread(target=self.httpd.serve_forever, kwargs={"poll_interval": 0.02}, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    @property
    def request_count(self) -> int:
        with self._lock:
            return len(self.log)

    def paths(self) -> list[str]:
        with self._lock:
            return [p for _, p in self.log]

    def __enter__(self) -> "FixtureServer":
        self.thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


def routes(table: dict[str, Reply], default: Reply | None = None) -> Handler:
    """Exact path lookup with a 404 default."""
    default = default or Reply(404, "not found")

    def handle(path: str) -> Reply:
        return table.get(path, default)

    return handle


def swh_handler(origins: dict[str, list[dict]], prefix: str = "", failing: dict[str, Reply] | None = None) -> Handler:
    """Minimal origin/visits API: ``origins`` maps origin URL to visit objects.

    Visit listings are paginated by ``per_page`` with a ``Link: rel="next"`` header.
    ``failing`` maps a path to a canned reply that overrides everything else.
    """
    import json
    from urllib.parse import parse_qs, urlsplit

    failing = failing or {}

    def handle(path: str) -> Reply:
        if path in failing:
            return failing[path]
        parts = urlsplit(path)
        p = parts.path[len(prefix):]
        if not p.startswith("/api/1/origin/"):
            return Reply(404)
        rest = p[len("/api/1/origin/"):]
        if rest.endswith("/get/"):
            origin = rest[:-len("/get/")]
            if origin in origins:
                return Reply(200, json.dumps({"url": origin}), {"Content-Type": "application/json"})
            return Reply(404, json.dumps({"exception": "NotFoundExc"}))
        if rest.endswith("/visits/"):
            origin = rest[:-len("/visits/")]
            if origin not in origins:
                return Reply(404)
            q = parse_qs(parts.query)
            per_page = int(q.get("per_page", ["1000"])[0])
            start = int(q.get("start", ["0"])[0])
            visits = origins[origin]
            page = visits[start:start + per_page]
            headers = {"Content-Type": "application/json"}
            if start + per_page < len(visits):
                nxt = f"{prefix}/api/1/origin/{origin}/visits/?per_page={per_page}&start={start + per_page}"
                headers["Link"] = f'<{nxt}>; rel="next"'
            return Reply(200, json.dumps(page), headers)
        return Reply(404)

    return handle


def visit(n: int, day: str, status: str = "full") -> dict:
    return {"visit": n, "date": f"{day}T12:00:00.123456+00:00", "status": status, "snapshot": f"{n:040x}"}
