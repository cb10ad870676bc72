"""Live-Web availability probe: a URI is active iff it ends in a 2XX after redirects."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from urllib.parse import urljoin

import requests

from .http import ErrorClass, HttpClient, classify_exception

REDIRECT_STATUSES = frozenset({301, 302, 303, 307, 308})


class Outcome(str, Enum):
    ACTIVE = "Active"
    ROTTEN = "Rotten"


@dataclass
class ProbePolicy:
    max_redirects: int = 10
    retries: int = 2
    backoff: float = 0.5
    timeout: float = 30.0
    read_cap: int = 2048


@dataclass
class LivenessResult:
    uri: str
    final_status: int | None
    redirect_chain: list[tuple[int, str]] = field(default_factory=list)
    outcome: Outcome = Outcome.ROTTEN
    error_class: ErrorClass = ErrorClass.NONE
    probed_at: str = ""

    @property
    def active(self) -> bool:
        return self.outcome is Outcome.ACTIVE

    def to_dict(self) -> dict:
        return {
            "uri": self.uri,
            "final_status": self.final_status,
            "redirect_chain": [list(hop) for hop in self.redirect_chain],
            "outcome": self.outcome.value,
            "error_class": self.error_class.value,
            "probed_at": self.probed_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LivenessResult":
        return cls(
            uri=d["uri"],
            final_status=d["final_status"],
            redirect_chain=[(int(s), loc) for s, loc in d["redirect_chain"]],
            outcome=Outcome(d["outcome"]),
            error_class=ErrorClass(d["error_class"]),
            probed_at=d.get("probed_at", ""),
        )


def outcome_for(status: int | None) -> Outcome:
    return Outcome.ACTIVE if status is not None and 200 <= status <= 299 else Outcome.ROTTEN


def _now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


def _fetch_once(client: HttpClient, url: str, policy: ProbePolicy) -> requests.Response:
    """GET one hop, retrying timeouts and connection faults with backoff."""
    attempt = 0
    while True:
        try:
            resp = client.send(url, stream=True, timeout=policy.timeout)
            try:
                resp.raw.read(policy.read_cap)
            except Exception:
                pass
            resp.close()
            return resp
        except requests.RequestException as exc:
            if classify_exception(exc) in (ErrorClass.TIMEOUT, ErrorClass.CONNECTION) and attempt < policy.retries:
                time.sleep(policy.backoff * (2 ** attempt))
                attempt += 1
                continue
            raise


def probe(uri: str, policy: ProbePolicy | None = None, client: HttpClient | None = None) -> LivenessResult:
    """Probe ``uri``; never raises for network faults, which are encoded in the result."""
    policy = policy or ProbePolicy()
    client = client or HttpClient()
    chain: list[tuple[int, str]] = []
    seen = {uri}
    url = uri
    started = _now()
    while True:
        try:
            resp = _fetch_once(client, url, policy)
        except requests.RequestException as exc:
            return LivenessResult(uri, None, chain, Outcome.ROTTEN, classify_exception(exc), started)
        location = resp.headers.get("Location")
        if resp.status_code in REDIRECT_STATUSES and location:
            nxt = urljoin(url, location)
            if len(chain) >= policy.max_redirects or nxt in seen:
                chain.append((resp.status_code, location))
                # keep the chain within the configured bound
                chain = chain[: policy.max_redirects]
                return LivenessResult(uri, None, chain, Outcome.ROTTEN, ErrorClass.TOO_MANY_REDIRECTS, started)
            chain.append((resp.status_code, location))
            seen.add(nxt)
            url = nxt
            continue
        return LivenessResult(uri, resp.status_code, chain, outcome_for(resp.status_code), ErrorClass.NONE, started)
