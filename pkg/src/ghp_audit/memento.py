"""Link-format TimeMap parsing and multi-archive TimeMap aggregation."""

from __future__ import annotations

import email.utils
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable

import requests

from .http import ErrorClass, FetchError, HttpClient, classify_exception

log = logging.getLogger(__name__)

URI_R_SLOT = "{uri_r}"


class LinkFormatError(ValueError):
    """Body is not a link-format document at all."""


@dataclass(frozen=True)
class Link:
    uri: str
    rels: frozenset[str]
    attributes: dict[str, str]


@dataclass
class LinkFormatResult:
    links: list[Link]
    warnings: list[str] = field(default_factory=list)


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def _quoted(text: str, i: int) -> tuple[str, int]:
    """Read a quoted string starting at the opening quote; return (value, index past close)."""
    out = []
    i += 1
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            out.append(text[i + 1])
            i += 2
            continue
        if c == '"':
            return "".join(out), i + 1
        out.append(c)
        i += 1
    raise ValueError("unterminated quoted string")


def _parse_link(text: str, i: int) -> tuple[Link, int]:
    if text[i] != "<":
        raise ValueError(f"expected '<' at offset {i}")
    end = text.find(">", i + 1)
    if end < 0:
        raise ValueError("unterminated URI reference")
    uri = text[i + 1:end].strip()
    i = end + 1
    attrs: dict[str, str] = {}
    while True:
        i = _skip_ws(text, i)
        if i >= len(text) or text[i] == ",":
            break
        if text[i] != ";":
            raise ValueError(f"unexpected {text[i]!r} at offset {i}")
        i = _skip_ws(text, i + 1)
        j = i
        while j < len(text) and text[j] not in "=;,":
            j += 1
        name = text[i:j].strip().lower()
        if not name:
            raise ValueError(f"empty parameter name at offset {i}")
        i = j
        value = ""
        if i < len(text) and text[i] == "=":
            i = _skip_ws(text, i + 1)
            if i < len(text) and text[i] == '"':
                value, i = _quoted(text, i)
            else:
                j = i
                while j < len(text) and text[j] not in ";,":
                    j += 1
                value = text[i:j].strip()
                i = j
        # first occurrence wins, per web linking rules
        attrs.setdefault(name, value)
    rels = frozenset(r.lower() for r in attrs.get("rel", "").split())
    return Link(uri, rels, attrs), i


def parse_link_format(body: str) -> LinkFormatResult:
    """Parse a comma-separated list of ``<uri>; key="value"`` links.

    Malformed entries are skipped with a warning. A non-empty body that yields
    no link at all raises ``LinkFormatError``.
    """
    links: list[Link] = []
    warnings: list[str] = []
    i = 0
    n = len(body)
    while True:
        i = _skip_ws(body, i)
        while i < n and body[i] == ",":
            i = _skip_ws(body, i + 1)
        if i >= n:
            break
        try:
            link, i = _parse_link(body, i)
            links.append(link)
        except ValueError as exc:
            warnings.append(str(exc))
            nxt = body.find("<", i + 1)
            # resume at the next entry boundary
            while nxt >= 0 and body[:nxt].rstrip()[-1:] != ",":
                nxt = body.find("<", nxt + 1)
            if nxt < 0:
                break
            i = nxt
    if not links and body.strip():
        raise LinkFormatError("; ".join(warnings) or "no links found")
    return LinkFormatResult(links, warnings)


def parse_http_datetime(value: str) -> datetime:
    """RFC 1123 date (``Sat, 01 Jan 2000 00:00:00 GMT``) as an aware UTC datetime."""
    dt = email.utils.parsedate_to_datetime(value.strip())
    if dt is None:
        raise ValueError(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class ArchiveEndpoint:
    id: str
    display_name: str
    timemap_template: str

    def __post_init__(self):
        if self.timemap_template.count(URI_R_SLOT) != 1:
            raise ValueError(f"{self.id}: template must contain {URI_R_SLOT} exactly once")

    def timemap_uri(self, uri_r: str) -> str:
        return self.timemap_template.replace(URI_R_SLOT, uri_r)


def parse_registry(text: str) -> list[ArchiveEndpoint]:
    """One archive per line: ``id<TAB>display name<TAB>template``; ``#`` comments."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) != 3 or not all(parts):
            raise ValueError(f"registry line {lineno}: expected 3 tab-separated fields")
        out.append(ArchiveEndpoint(*parts))
    ids = [e.id for e in out]
    if len(set(ids)) != len(ids):
        raise ValueError("registry has duplicate archive ids")
    if not out:
        raise ValueError("registry is empty")
    return out


def load_registry(path: str | Path | None = None) -> list[ArchiveEndpoint]:
    if path is None:
        text = resources.files("ghp_audit").joinpath("data/archives.tsv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_registry(text)


@dataclass(frozen=True, order=True)
class Memento:
    memento_datetime: datetime
    archive_id: str
    uri_m: str


@dataclass
class ArchiveResponse:
    """What one archive said about a URI-R: a body, absence (None), or a failure."""

    body: str | None = None
    error: ErrorClass | None = None

    def to_dict(self) -> dict:
        return {"body": self.body, "error": self.error.value if self.error else None}

    @classmethod
    def from_dict(cls, d: dict) -> "ArchiveResponse":
        return cls(d.get("body"), ErrorClass(d["error"]) if d.get("error") else None)


@dataclass
class TimeMapSummary:
    uri_r: str
    mementos: list[Memento]
    per_archive_counts: dict[str, int]
    failed_archives: list[tuple[str, str]]
    warnings: list[str] = field(default_factory=list)
    unknown: bool = False

    @property
    def memento_count(self) -> int:
        return len(self.mementos)

    @property
    def first_memento(self) -> datetime | None:
        return self.mementos[0].memento_datetime if self.mementos else None

    @property
    def last_memento(self) -> datetime | None:
        return self.mementos[-1].memento_datetime if self.mementos else None

    @property
    def archived(self) -> bool | None:
        """True with ≥1 memento; None when every archive failed."""
        if self.mementos:
            return True
        return None if self.unknown else False


def mementos_from_links(archive_id: str, links: Iterable[Link], warnings: list[str]) -> list[Memento]:
    out = []
    for link in links:
        if "memento" not in link.rels:
            continue
        raw = link.attributes.get("datetime")
        if raw is None:
            warnings.append(f"{archive_id}: memento {link.uri} lacks datetime")
            continue
        try:
            dt = parse_http_datetime(raw)
        except (TypeError, ValueError):
            warnings.append(f"{archive_id}: bad datetime {raw!r} for {link.uri}")
            continue
        out.append(Memento(dt, archive_id, link.uri))
    return out


def merge(uri_r: str, responses: dict[str, ArchiveResponse]) -> TimeMapSummary:
    """Merge per-archive responses; the result does not depend on dict order."""
    mementos: list[Memento] = []
    counts: dict[str, int] = {}
    failed: list[tuple[str, str]] = []
    warnings: list[str] = []
    for archive_id in sorted(responses):
        resp = responses[archive_id]
        if resp.error is not None:
            failed.append((archive_id, resp.error.value))
            continue
        if not resp.body:
            continue
        try:
            parsed = parse_link_format(resp.body)
        except LinkFormatError as exc:
            failed.append((archive_id, ErrorClass.PARSE.value))
            warnings.append(f"{archive_id}: {exc}")
            continue
        warnings.extend(f"{archive_id}: {w}" for w in parsed.warnings)
        # exact duplicates within one archive collapse; cross-archive copies stay
        found = sorted(set(mementos_from_links(archive_id, parsed.links, warnings)))
        if found:
            counts[archive_id] = len(found)
            mementos.extend(found)
    mementos.sort()
    unknown = bool(responses) and len(failed) == len(responses)
    return TimeMapSummary(uri_r, mementos, counts, failed, warnings, unknown)


Fetcher = Callable[[ArchiveEndpoint, str], ArchiveResponse]


def http_fetcher(client: HttpClient, timeout: float = 30.0) -> Fetcher:
    def fetch(endpoint: ArchiveEndpoint, uri_r: str) -> ArchiveResponse:
        try:
            resp = client.get(endpoint.timemap_uri(uri_r), timeout=timeout, max_redirects=5)
        except FetchError as exc:
            return ArchiveResponse(error=exc.error_class)
        if resp.status_code == 404:
            return ArchiveResponse(None)
        if resp.status_code != 200:
            return ArchiveResponse(error=ErrorClass.HTTP)
        return ArchiveResponse(resp.text)
    return fetch


def _safe_fetch(fetch: Fetcher, endpoint: ArchiveEndpoint, uri_r: str) -> ArchiveResponse:
    try:
        return fetch(endpoint, uri_r)
    except FetchError as exc:
        return ArchiveResponse(error=exc.error_class)
    except requests.RequestException as exc:
        # one archive must never sink the aggregate; config errors and cache misses still propagate
        log.warning("%s failed for %s: %s", endpoint.id, uri_r, exc)
        return ArchiveResponse(error=classify_exception(exc))


def aggregate(uri_r: str, registry: list[ArchiveEndpoint], fetch: Fetcher,
              max_workers: int | None = None) -> TimeMapSummary:
    """Query every archive for ``uri_r`` concurrently and merge the TimeMaps."""
    if not uri_r:
        raise ValueError("empty URI-R")
    if not registry:
        raise ValueError("empty archive registry")
    workers = max_workers or len(registry)
    if workers <= 1:
        responses = {e.id: _safe_fetch(fetch, e, uri_r) for e in registry}
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {e.id: pool.submit(_safe_fetch, fetch, e, uri_r) for e in registry}
            responses = {k: f.result() for k, f in futures.items()}
    return merge(uri_r, responses)
