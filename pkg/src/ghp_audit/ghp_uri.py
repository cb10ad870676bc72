"""Recognition and repository-level canonicalization of git hosting platform URIs.

Four platforms are recognized: GitHub, GitLab, Bitbucket and SourceForge.
Anything else, including self-hosted GitLab instances, is ``NotGhp``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from urllib.parse import unquote, urlsplit


class Platform(str, Enum):
    GITHUB = "GitHub"
    GITLAB = "GitLab"
    BITBUCKET = "Bitbucket"
    SOURCEFORGE = "SourceForge"


HOSTS = {
    "github.com": Platform.GITHUB,
    "gitlab.com": Platform.GITLAB,
    "bitbucket.org": Platform.BITBUCKET,
    "sourceforge.net": Platform.SOURCEFORGE,
}

# First path segments that are site pages rather than owners.
RESERVED_OWNERS = {
    Platform.GITHUB: frozenset({
        "about", "apps", "collections", "contact", "customer-stories", "enterprise",
        "events", "explore", "features", "issues", "join", "login", "marketplace",
        "notifications", "orgs", "pricing", "pulls", "search", "security", "settings",
        "site", "sponsors", "topics", "trending", "users",
    }),
    Platform.GITLAB: frozenset({"dashboard", "explore", "groups", "help", "users", "-"}),
    Platform.BITBUCKET: frozenset({"account", "dashboard", "product", "site", "support"}),
}

GITLAB_MARKERS = frozenset({"-", "blob", "tree", "issues", "merge_requests", "wikis", "raw"})

# sourceforge.net subdomains that are services, not projects.
SF_SERVICE_HOSTS = frozenset({"downloads", "prdownloads", "master", "lists", "apps", "svn", "git", "hg", "cvs"})
SF_PROJECT_PREFIXES = ("projects", "p", "project")

_SCHEME_RE = re.compile(r"^[a-zA-Z][a-zA-Z0-9+.-]*://")


@dataclass(frozen=True)
class GhpUri:
    original_uri: str
    platform: Platform
    repo_path: tuple[str, ...]
    canonical_repo_uri: str
    is_deep: bool

    @property
    def project(self) -> str:
        """Last repository path segment (the SourceForge project name for SourceForge)."""
        return self.repo_path[-1]


@dataclass(frozen=True)
class NotGhp:
    raw: str
    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class NotRepository:
    """A URI on a recognized host that does not name a repository."""

    raw: str
    platform: Platform
    reason: str

    def __bool__(self) -> bool:
        return False


ParseResult = GhpUri | NotGhp | NotRepository


def _platform_for_host(host: str) -> tuple[Platform | None, str | None]:
    """Return (platform, sourceforge subdomain project or None)."""
    if host.startswith("www."):
        bare = host[4:]
    else:
        bare = host
    if bare in HOSTS:
        return HOSTS[bare], None
    if host.endswith(".sourceforge.net"):
        sub = host[: -len(".sourceforge.net")]
        if "." in sub or not sub:
            return None, None
        return Platform.SOURCEFORGE, sub
    return None, None


def _strip_git(segment: str) -> str:
    return segment[:-4] if segment.endswith(".git") and len(segment) > 4 else segment


def parse(raw: str) -> ParseResult:
    """Parse and canonicalize a cited URI.

    A missing scheme is taken as ``https://``. Only http(s) URIs are accepted.
    """
    text = raw.strip().strip("<>").strip()
    if not text:
        return NotGhp(raw, "empty")
    if not _SCHEME_RE.match(text):
        if text.startswith("git@") or ":" in text.split("/", 1)[0]:
            return NotGhp(raw, "unsupported scheme")
        text = "https://" + text
    try:
        parts = urlsplit(text)
        host = parts.hostname
    except ValueError as exc:
        return NotGhp(raw, f"unparseable: {exc}")
    scheme = parts.scheme.lower()
    if scheme not in ("http", "https"):
        return NotGhp(raw, f"unsupported scheme {scheme!r}")
    if not host:
        return NotGhp(raw, "no host")
    host = unquote(host).lower().rstrip(".")
    platform, sf_sub = _platform_for_host(host)
    if platform is None:
        return NotGhp(raw, f"host {host!r} is not a git hosting platform")

    segments = [s for s in parts.path.split("/") if s]
    original = f"{scheme}://{host}{parts.path}"
    if parts.query:
        original += "?" + parts.query
    if parts.fragment:
        original += "#" + parts.fragment

    if platform is Platform.SOURCEFORGE:
        return _parse_sourceforge(raw, original, segments, sf_sub)
    if platform is Platform.GITLAB:
        repo, deep = _gitlab_repo(segments)
    else:
        repo = [_strip_git(s) for s in segments[:2]]
        deep = len(segments) > 2
    if len(repo) < 2:
        return NotRepository(raw, platform, "fewer path segments than a repository requires")
    if repo[0].lower() in RESERVED_OWNERS[platform]:
        return NotRepository(raw, platform, f"{repo[0]!r} is a site page, not an owner")
    bare_host = host[4:] if host.startswith("www.") else host
    canonical = f"https://{bare_host}/" + "/".join(repo)
    return GhpUri(original, platform, tuple(repo), canonical, deep)


def _gitlab_repo(segments: list[str]) -> tuple[list[str], bool]:
    repo: list[str] = []
    for seg in segments:
        if seg in GITLAB_MARKERS:
            break
        if seg.endswith(".git") and len(seg) > 4:
            repo.append(_strip_git(seg))
            break
        repo.append(seg)
    return repo, len(repo) < len(segments)


def _parse_sourceforge(raw: str, original: str, segments: list[str], sub: str | None) -> ParseResult:
    if sub is not None and sub not in SF_SERVICE_HOSTS:
        name = sub
        deep = bool(segments)
    elif len(segments) >= 2 and segments[0] in SF_PROJECT_PREFIXES:
        name = segments[1]
        deep = len(segments) > 2
    else:
        return NotRepository(raw, Platform.SOURCEFORGE, "no SourceForge project name in URI")
    name = _strip_git(name).lower()
    return GhpUri(original, Platform.SOURCEFORGE, (name,), f"https://sourceforge.net/projects/{name}", deep)


def canonicalize(uri: GhpUri | str) -> str:
    """Repository-level form of a GHP URI.

    Raises ``ValueError`` when given a string that is not a repository URI.
    """
    if isinstance(uri, GhpUri):
        return uri.canonical_repo_uri
    parsed = parse(uri)
    if not parsed:
        raise ValueError(f"{uri!r}: {parsed.reason}")
    return parsed.canonical_repo_uri


def comparison_key(uri: GhpUri) -> str:
    """Key under which two canonical URIs name the same repository.

    GitLab paths are case-sensitive; the other platforms are not.
    """
    if uri.platform is Platform.GITLAB:
        return uri.canonical_repo_uri
    return uri.canonical_repo_uri.lower()
