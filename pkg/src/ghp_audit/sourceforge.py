"""SourceForge project resolution to version-control access URLs.

A SourceForge project can only be in Software Heritage if it exposes at least
one clone/checkout URL. Projects without one are excluded from Software
Heritage coverage rather than counted as unarchived.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .cache import ObservationCache
from .http import FetchError, HttpClient
from .swh import Lookup, SwhClient

DEFAULT_BASE_URL = "https://sourceforge.net/rest"
VCS_TOOLS = ("git", "svn", "hg", "cvs", "bzr")

# Clone URL layout for hosted code tools when the API omits the clone fields.
_CLONE_PATTERNS = {
    "git": "https://git.code.sf.net/p/{project}/{mount}",
    "svn": "https://svn.code.sf.net/p/{project}/{mount}",
    "hg": "http://hg.code.sf.net/p/{project}/{mount}",
}


class ProjectStatus(str, Enum):
    FOUND = "found"
    MISSING = "missing"
    UNKNOWN = "unknown"


class SfSwhStatus(str, Enum):
    EXCLUDED = "Excluded"
    ARCHIVED = "Archived"
    NOT_ARCHIVED = "NotArchived"
    UNKNOWN = "Unknown"


@dataclass
class SfProject:
    name: str
    access_urls: list[tuple[str, str]] = field(default_factory=list)
    fetched_at: str = ""
    status: ProjectStatus = ProjectStatus.FOUND

    @property
    def missing(self) -> bool:
        return self.status is ProjectStatus.MISSING


def access_urls_from_api(project: str, payload: dict) -> list[tuple[str, str]]:
    """Extract (tool kind, clone URL) pairs from a project API document."""
    out = []
    for tool in payload.get("tools") or []:
        kind = str(tool.get("name", "")).lower()
        if kind not in VCS_TOOLS:
            continue
        url = tool.get("clone_url_https_anon") or tool.get("clone_url_ro")
        if not url and kind in _CLONE_PATTERNS and tool.get("mount_point"):
            url = _CLONE_PATTERNS[kind].format(project=project, mount=tool["mount_point"])
        if url and "://" in url:
            out.append((kind, url))
    return sorted(set(out))


class SourceForgeClient:
    def __init__(self, http: HttpClient | None = None, base_url: str = DEFAULT_BASE_URL,
                 cache: ObservationCache | None = None, refetch_unknown: bool = False):
        self.http = http or HttpClient()
        self.base_url = base_url.rstrip("/")
        self.cache = cache if cache is not None else ObservationCache()
        self.refetch_unknown = refetch_unknown

    def _get(self, name: str) -> dict:
        now = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
        try:
            resp = self.http.get(f"{self.base_url}/p/{name}", max_redirects=3)
        except FetchError as exc:
            return {"status": ProjectStatus.UNKNOWN.value, "error": exc.error_class.value, "fetched_at": now}
        if resp.status_code == 404:
            return {"status": ProjectStatus.MISSING.value, "fetched_at": now}
        if resp.status_code != 200:
            return {"status": ProjectStatus.UNKNOWN.value, "error": f"http {resp.status_code}", "fetched_at": now}
        try:
            doc = resp.json()
        except ValueError:
            return {"status": ProjectStatus.UNKNOWN.value, "error": "bad json", "fetched_at": now}
        return {"status": ProjectStatus.FOUND.value, "document": doc, "fetched_at": now}

    def fetch_access_urls(self, project_name: str) -> SfProject:
        if not project_name:
            raise ValueError("empty SourceForge project name")
        payload = self.cache.fetch(
            "sf_project", project_name, self.base_url, lambda: self._get(project_name),
            lambda p: self.refetch_unknown and p["status"] == ProjectStatus.UNKNOWN.value,
        )
        status = ProjectStatus(payload["status"])
        urls = access_urls_from_api(project_name, payload.get("document") or {}) if status is ProjectStatus.FOUND else []
        return SfProject(project_name, urls, payload.get("fetched_at", ""), status)


def swh_status_for_project(project: SfProject, swh: SwhClient) -> SfSwhStatus:
    """Any archived access URL makes the project archived."""
    if project.status is ProjectStatus.UNKNOWN:
        return SfSwhStatus.UNKNOWN
    if not project.access_urls:
        return SfSwhStatus.EXCLUDED
    unknown = False
    for _, url in project.access_urls:
        record = swh.archival_record(url)
        if record.archived:
            return SfSwhStatus.ARCHIVED
        if record.lookup is Lookup.UNKNOWN:
            unknown = True
    return SfSwhStatus.UNKNOWN if unknown else SfSwhStatus.NOT_ARCHIVED


def project_records(project: SfProject, swh: SwhClient) -> list:
    """Archival records for every access URL (used for capture histories)."""
    return [swh.archival_record(url) for _, url in project.access_urls]
