"""Software Heritage origin lookup and visit history."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable
from urllib.parse import urljoin

from .cache import ObservationCache
from .http import FetchError, HttpClient
from .memento import LinkFormatError, parse_link_format

log = logging.getLogger(__name__)

DEFAULT_BASE_URL = "https://archive.softwareheritage.org"
SUCCESS_STATUSES = frozenset({"full"})


class Lookup(str, Enum):
    FOUND = "found"
    NOT_FOUND = "not_found"
    UNKNOWN = "unknown"


class SwhUnavailable(Exception):
    """The archive could not answer (outage, throttling, broken pagination)."""


_FRACTION = re.compile(r"\.(\d+)")


def parse_timestamp(value: str) -> datetime:
    text = value.strip().replace("Z", "+00:00")
    # normalize fractional seconds to 6 digits for fromisoformat
    text = _FRACTION.sub(lambda m: "." + (m.group(1) + "000000")[:6], text, count=1)
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class SwhVisit:
    visit_number: int
    date: datetime
    status: str
    snapshot_id: str | None

    def __post_init__(self):
        if self.visit_number < 1:
            raise ValueError(f"visit number must be >= 1, got {self.visit_number}")

    @classmethod
    def from_api(cls, obj: dict) -> "SwhVisit":
        return cls(int(obj["visit"]), parse_timestamp(obj["date"]), str(obj.get("status", "")), obj.get("snapshot"))

    def to_dict(self) -> dict:
        return {"visit": self.visit_number, "date": self.date.isoformat(), "status": self.status,
                "snapshot": self.snapshot_id}


@dataclass
class SnapshotSummary:
    first: datetime | None
    last: datetime | None
    count: int


def counted(visit: SwhVisit, count_all: bool = False) -> bool:
    return count_all or visit.status in SUCCESS_STATUSES


def summarize(visits: Iterable[SwhVisit], count_all: bool = False) -> SnapshotSummary:
    """First/last date and count over successful visits (all visits with ``count_all``)."""
    kept = sorted((v for v in visits if counted(v, count_all)), key=lambda v: (v.date, v.visit_number))
    if not kept:
        return SnapshotSummary(None, None, 0)
    return SnapshotSummary(kept[0].date, kept[-1].date, len(kept))


@dataclass
class SwhArchivalRecord:
    queried_uri: str
    lookup: Lookup
    origin: str | None = None
    visits: list[SwhVisit] = field(default_factory=list)
    first_snapshot_date: datetime | None = None
    last_snapshot_date: datetime | None = None
    snapshot_count: int = 0

    @property
    def origin_found(self) -> bool:
        return self.lookup is Lookup.FOUND

    @property
    def archived(self) -> bool | None:
        """True with ≥1 counted snapshot, None when the archive could not answer."""
        if self.lookup is Lookup.UNKNOWN:
            return None
        return self.snapshot_count >= 1

    def capture_dates(self, count_all: bool = False) -> list[datetime]:
        return sorted(v.date for v in self.visits if counted(v, count_all))


@dataclass(frozen=True)
class OriginLookup:
    outcome: Lookup
    origin: str | None = None


class SwhClient:
    def __init__(self, http: HttpClient | None = None, base_url: str = DEFAULT_BASE_URL,
                 cache: ObservationCache | None = None, per_page: int = 1000,
                 count_all: bool = False, refetch_unknown: bool = False):
        self.http = http or HttpClient()
        self.base_url = base_url.rstrip("/")
        self.cache = cache if cache is not None else ObservationCache()
        self.per_page = per_page
        self.count_all = count_all
        self.refetch_unknown = refetch_unknown

    def _stale(self, payload: dict) -> bool:
        return self.refetch_unknown and payload.get("outcome") == Lookup.UNKNOWN.value

    def _get_origin(self, uri: str) -> dict:
        try:
            resp = self.http.get(f"{self.base_url}/api/1/origin/{uri}/get/")
        except FetchError as exc:
            return {"outcome": Lookup.UNKNOWN.value, "error": exc.error_class.value}
        if resp.status_code == 404:
            return {"outcome": Lookup.NOT_FOUND.value}
        if resp.status_code != 200:
            return {"outcome": Lookup.UNKNOWN.value, "error": f"http {resp.status_code}"}
        try:
            body = resp.json()
        except ValueError:
            return {"outcome": Lookup.UNKNOWN.value, "error": "bad json"}
        return {"outcome": Lookup.FOUND.value, "origin": body.get("url", uri)}

    def _lookup_exact(self, uri: str) -> OriginLookup:
        payload = self.cache.fetch("swh_origin", uri, self.base_url, lambda: self._get_origin(uri), self._stale)
        return OriginLookup(Lookup(payload["outcome"]), payload.get("origin"))

    def lookup_origin(self, repo_uri: str) -> OriginLookup:
        """Exact-string origin match, retried once with a ``.git`` suffix.

        ``repo_uri`` must already be repository-level; deep links never match.
        """
        first = self._lookup_exact(repo_uri)
        if first.outcome is not Lookup.NOT_FOUND or repo_uri.endswith(".git"):
            return first
        second = self._lookup_exact(repo_uri + ".git")
        return second if second.outcome is not Lookup.NOT_FOUND else first

    def _fetch_visits(self, origin: str) -> dict:
        url = f"{self.base_url}/api/1/origin/{origin}/visits/?per_page={self.per_page}"
        raw: list[dict] = []
        seen_pages = set()
        while url:
            if url in seen_pages:
                return {"outcome": Lookup.UNKNOWN.value, "error": "pagination loop"}
            seen_pages.add(url)
            try:
                resp = self.http.get(url)
            except FetchError as exc:
                return {"outcome": Lookup.UNKNOWN.value, "error": exc.error_class.value}
            if resp.status_code != 200:
                return {"outcome": Lookup.UNKNOWN.value, "error": f"http {resp.status_code}"}
            try:
                page = resp.json()
            except ValueError:
                return {"outcome": Lookup.UNKNOWN.value, "error": "bad json"}
            if not isinstance(page, list):
                return {"outcome": Lookup.UNKNOWN.value, "error": "unexpected payload"}
            raw.extend(page)
            url = _next_link(resp.headers.get("Link"), url)
        return {"outcome": Lookup.FOUND.value, "visits": raw}

    def list_visits(self, origin: str) -> list[SwhVisit]:
        """Every visit of ``origin`` in ascending date order, pagination exhausted."""
        payload = self.cache.fetch("swh_visits", origin, self.base_url, lambda: self._fetch_visits(origin),
                                   self._stale)
        if payload["outcome"] != Lookup.FOUND.value:
            raise SwhUnavailable(payload.get("error", "unknown"))
        try:
            visits = [SwhVisit.from_api(v) for v in payload["visits"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise SwhUnavailable(f"malformed visit: {exc}") from exc
        return sorted(visits, key=lambda v: (v.date, v.visit_number))

    def archival_record(self, repo_uri: str) -> SwhArchivalRecord:
        found = self.lookup_origin(repo_uri)
        if found.outcome is not Lookup.FOUND:
            return SwhArchivalRecord(repo_uri, found.outcome)
        try:
            visits = self.list_visits(found.origin)
        except SwhUnavailable as exc:
            log.info("visits of %s unavailable: %s", found.origin, exc)
            return SwhArchivalRecord(repo_uri, Lookup.UNKNOWN, found.origin)
        s = summarize(visits, self.count_all)
        return SwhArchivalRecord(repo_uri, Lookup.FOUND, found.origin, visits, s.first, s.last, s.count)


def _next_link(header: str | None, current: str) -> str | None:
    if not header:
        return None
    try:
        links = parse_link_format(header).links
    except LinkFormatError:
        return None
    for link in links:
        if "next" in link.rels:
            return urljoin(current, link.uri)
    return None
