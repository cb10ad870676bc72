"""Shared HTTP plumbing: politeness, retries, fixture redirection and offline guard."""

from __future__ import annotations

import email.utils
import logging
import random
import socket
import ssl
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from urllib.parse import urljoin, urlsplit, urlunsplit

import requests
import urllib3.exceptions

log = logging.getLogger(__name__)

DEFAULT_USER_AGENT = "ghp-audit/0.1 (scholarly link audit; polite crawler)"
LOOPBACK = frozenset({"127.0.0.1", "localhost", "::1"})
RETRY_STATUSES = frozenset({429, 500, 502, 503, 504})


class ErrorClass(str, Enum):
    NONE = "none"
    TIMEOUT = "timeout"
    DNS = "dns"
    TLS = "tls"
    CONNECTION = "connection"
    TOO_MANY_REDIRECTS = "too_many_redirects"
    HTTP = "http_error"
    PARSE = "parse"


class FetchError(Exception):
    def __init__(self, error_class: ErrorClass, message: str = ""):
        super().__init__(message or error_class.value)
        self.error_class = error_class


class OfflineError(RuntimeError):
    """A non-fixture host was contacted while running offline."""


def classify_exception(exc: BaseException) -> ErrorClass:
    """Map a requests/urllib3/socket exception to an error class."""
    chain = []
    cur: BaseException | None = exc
    while cur is not None and len(chain) < 16:
        chain.append(cur)
        nxt = cur.__cause__ or cur.__context__
        if nxt is None and cur.args and isinstance(cur.args[0], BaseException):
            nxt = cur.args[0]
        if nxt is None:
            nxt = getattr(cur, "reason", None) if isinstance(getattr(cur, "reason", None), BaseException) else None
        cur = nxt
    for e in chain:
        if isinstance(e, (urllib3.exceptions.NameResolutionError, socket.gaierror)):
            return ErrorClass.DNS
    for e in chain:
        if isinstance(e, (requests.exceptions.SSLError, ssl.SSLError, urllib3.exceptions.SSLError)):
            return ErrorClass.TLS
    for e in chain:
        # NewConnectionError subclasses ConnectTimeoutError in urllib3 2.x
        if isinstance(e, (urllib3.exceptions.NewConnectionError, ConnectionRefusedError)):
            return ErrorClass.CONNECTION
    for e in chain:
        if isinstance(e, (requests.exceptions.Timeout, socket.timeout, urllib3.exceptions.TimeoutError)):
            return ErrorClass.TIMEOUT
    return ErrorClass.CONNECTION


class HostRateLimiter:
    """Enforce a minimum interval between request starts to the same host."""

    def __init__(self, interval: float = 0.0):
        self.interval = interval
        self._lock = threading.Lock()
        self._next: dict[str, float] = {}

    def wait(self, host: str) -> None:
        if self.interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next.get(host, now))
            self._next[host] = slot + self.interval
        delay = slot - now
        if delay > 0:
            time.sleep(delay)


@dataclass
class HttpConfig:
    user_agent: str = DEFAULT_USER_AGENT
    timeout: float = 30.0
    retries: int = 2
    backoff: float = 0.5
    max_backoff: float = 60.0
    min_interval: float = 0.0
    offline: bool = False
    # host -> base URL, e.g. {"github.com": "http://127.0.0.1:8001"}
    rewrites: dict[str, str] = field(default_factory=dict)


class HttpClient:
    def __init__(self, config: HttpConfig | None = None):
        self.config = config or HttpConfig()
        self.limiter = HostRateLimiter(self.config.min_interval)
        self._local = threading.local()
        self._count_lock = threading.Lock()
        self.request_count = 0

    @property
    def session(self) -> requests.Session:
        s = getattr(self._local, "session", None)
        if s is None:
            s = requests.Session()
            s.headers["User-Agent"] = self.config.user_agent
            s.trust_env = False
            self._local.session = s
        return s

    def resolve(self, url: str) -> str:
        """Apply fixture host rewrites."""
        parts = urlsplit(url)
        base = self.config.rewrites.get((parts.hostname or "").lower())
        if base is None:
            return url
        b = urlsplit(base)
        path = b.path.rstrip("/") + parts.path
        return urlunsplit((b.scheme, b.netloc, path, parts.query, ""))

    def _check_offline(self, url: str) -> None:
        host = (urlsplit(url).hostname or "").lower()
        if self.config.offline and host not in LOOPBACK and not host.endswith(".invalid"):
            raise OfflineError(f"offline run refused request to {url}")

    def backoff_delay(self, attempt: int, retry_after: str | None = None) -> float:
        if retry_after:
            delay = _parse_retry_after(retry_after)
            if delay is not None:
                return min(delay, self.config.max_backoff)
        base = self.config.backoff * (2 ** attempt)
        return min(base * random.uniform(0.5, 1.5), self.config.max_backoff)

    def send(self, url: str, *, stream: bool = False, timeout: float | None = None,
             headers: dict | None = None) -> requests.Response:
        """One request attempt, no redirects followed. Raises requests exceptions."""
        target = self.resolve(url)
        self._check_offline(target)
        self.limiter.wait(urlsplit(target).netloc)
        with self._count_lock:
            self.request_count += 1
        log.debug("GET %s", target)
        return self.session.get(target, allow_redirects=False, stream=stream,
                                timeout=timeout or self.config.timeout, headers=headers)

    def get(self, url: str, *, timeout: float | None = None, headers: dict | None = None,
            max_redirects: int = 0) -> requests.Response:
        """GET with retries on network faults, 429 and 5xx.

        Returns the last response once retries are spent (caller inspects the
        status); raises ``FetchError`` when no response was ever received.
        """
        for _ in range(max_redirects):
            resp = self._get_with_retries(url, timeout, headers)
            location = resp.headers.get("Location")
            if resp.status_code not in (301, 302, 303, 307, 308) or not location:
                return resp
            resp.close()
            url = urljoin(url, location)
        if max_redirects:
            resp = self._get_with_retries(url, timeout, headers)
            if resp.status_code in (301, 302, 303, 307, 308):
                raise FetchError(ErrorClass.TOO_MANY_REDIRECTS, url)
            return resp
        return self._get_with_retries(url, timeout, headers)

    def _get_with_retries(self, url: str, timeout: float | None, headers: dict | None) -> requests.Response:
        attempt = 0
        while True:
            try:
                resp = self.send(url, timeout=timeout, headers=headers)
            except requests.RequestException as exc:
                cls = classify_exception(exc)
                if cls in (ErrorClass.TIMEOUT, ErrorClass.CONNECTION) and attempt < self.config.retries:
                    time.sleep(self.backoff_delay(attempt))
                    attempt += 1
                    continue
                raise FetchError(cls, f"{url}: {exc}") from exc
            if resp.status_code in RETRY_STATUSES and attempt < self.config.retries:
                delay = self.backoff_delay(attempt, resp.headers.get("Retry-After"))
                log.info("%s -> %d, retrying in %.2fs", url, resp.status_code, delay)
                resp.close()
                time.sleep(delay)
                attempt += 1
                continue
            return resp


def _parse_retry_after(value: str) -> float | None:
    value = value.strip()
    if value.isdigit():
        return float(value)
    try:
        when = email.utils.parsedate_to_datetime(value)
    except (TypeError, ValueError):
        return None
    return max(0.0, when.timestamp() - time.time())
