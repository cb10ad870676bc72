"""A small closed world: cited repositories, their live state and their archive holdings.

Everything the mock server answers is derived from the truth tables below, so
expected report values can be counted straight from them.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone

from helpers import Reply, swh_handler

# (index, live, swh, web): y/n/u for archived/not/unknown; for SourceForge "x" marks no access URL
TRUTH = {
    "github": [
        (0, 1, "y", "y"), (1, 1, "y", "n"), (2, 1, "n", "y"), (3, 0, "n", "n"), (4, 1, "y", "y"),
        (5, 1, "y", "y"), (6, 1, "n", "n"), (7, 0, "y", "y"), (8, 1, "y", "y"), (9, 1, "y", "n"),
        (10, 1, "n", "y"), (11, 0, "n", "y"), (12, 1, "y", "y"), (13, 1, "y", "y"), (14, 1, "n", "n"),
        (15, 0, "n", "n"), (16, 1, "y", "y"), (17, 1, "y", "y"), (18, 1, "y", "u"), (19, 1, "u", "y"),
    ],
    "gitlab": [
        (0, 1, "y", "y"), (1, 1, "n", "y"), (2, 0, "y", "n"), (3, 1, "y", "y"),
        (4, 1, "n", "n"), (5, 0, "n", "n"), (6, 1, "y", "y"), (7, 0, "n", "y"),
    ],
    "bitbucket": [
        (0, 0, "n", "y"), (1, 0, "n", "n"), (2, 1, "y", "y"), (3, 0, "y", "y"), (4, 1, "n", "y"), (5, 0, "n", "n"),
    ],
    "sourceforge": [
        (0, 1, "x", "y"), (1, 1, "x", "n"), (2, 1, "y", "y"), (3, 0, "y", "y"), (4, 1, "n", "n"), (5, 1, "y", "y"),
    ],
}

HOSTS = {"github": "github.com", "gitlab": "gitlab.com", "bitbucket": "bitbucket.org",
         "sourceforge": "sourceforge.net"}
PREFIX = {"github": "gh", "gitlab": "gl", "bitbucket": "bb", "sourceforge": "sf"}
ARCHIVES = ("ia", "ait", "ukwa")
GITLAB_DOT_GIT = {0, 3}  # origins registered with the clone suffix


@dataclass
class Repo:
    platform: str
    index: int
    live: bool
    swh: str
    web: str

    @property
    def name(self) -> str:
        return f"{PREFIX[self.platform]}{self.index:02d}"

    @property
    def canonical(self) -> str:
        if self.platform == "sourceforge":
            return f"https://sourceforge.net/projects/{self.name}"
        return f"https://{HOSTS[self.platform]}/o/{self.name}"

    @property
    def deep(self) -> str:
        return self.canonical + {
            "github": "/blob/main/README.md", "gitlab": "/-/tree/main/src", "bitbucket": "/src/master/",
            "sourceforge": "/files/latest/download",
        }[self.platform]

    @property
    def deep_live(self) -> bool:
        return self.live and self.index % 7 != 3

    @property
    def deep_web(self) -> str:
        if self.web == "u":
            return "u"
        return "y" if self.web == "y" and self.index % 4 == 0 else "n"

    @property
    def pub(self) -> date:
        offset = list(HOSTS).index(self.platform) * 13
        return date(2015, 1, 15) + timedelta(days=70 * self.index + offset)

    @property
    def deep_pub(self) -> date:
        return self.pub + timedelta(days=200)

    @property
    def duplicated(self) -> bool:
        return self.index % 3 == 0


def repos() -> list[Repo]:
    return [Repo(p, i, bool(live), swh, web) for p, rows in TRUTH.items() for i, live, swh, web in rows]


def _ts(d: date) -> datetime:
    return datetime(d.year, d.month, d.day, 12, tzinfo=timezone.utc)


def _http_date(d: date) -> str:
    return _ts(d).strftime("%a, %d %b %Y %H:%M:%S GMT")


def canonical_mementos(r: Repo) -> dict[str, list[date]]:
    """Capture dates per archive for a web-archived canonical URI."""
    p = r.pub
    first = {0: [p + timedelta(days=40), p + timedelta(days=400)],
             1: [p - timedelta(days=100), p + timedelta(days=10)],
             2: [p - timedelta(days=50), p - timedelta(days=20)]}[r.index % 3]
    out = {"ia": first}
    if r.index % 2 == 0:
        out["ait"] = [p + timedelta(days=800)]
    return out


def deep_mementos(r: Repo) -> dict[str, list[date]]:
    return {"ia": [r.deep_pub + timedelta(days=5)]}


def swh_visits(r: Repo) -> list[dict]:
    p = r.pub
    days = [p + timedelta(days=30 * (r.index % 5)), p + timedelta(days=500)]
    if r.index % 4 == 1:
        days.insert(0, p - timedelta(days=300))
    visits = [{"visit": n, "date": _ts(d).isoformat(), "status": "full", "snapshot": f"{n:040x}"}
              for n, d in enumerate(days, 1)]
    visits.append({"visit": len(visits) + 1, "date": _ts(p + timedelta(days=600)).isoformat(),
                   "status": "partial", "snapshot": None})
    return list(reversed(visits))  # the API lists newest first


def sf_access_urls(r: Repo) -> list[str]:
    if r.swh == "x":
        return []
    if r.index == 5:
        return [f"https://svn.code.sf.net/p/{r.name}/svn", f"https://git.code.sf.net/p/{r.name}/code"]
    if r.swh == "n":
        return [f"https://svn.code.sf.net/p/{r.name}/svn"]
    return [f"https://git.code.sf.net/p/{r.name}/code"]


def sf_document(r: Repo) -> dict:
    tools = [{"name": "wiki", "mount_point": "wiki"}, {"name": "files", "mount_point": "files"}]
    for url in sf_access_urls(r):
        kind = "svn" if "svn." in url else "git"
        tools.append({"name": kind, "mount_point": url.rsplit("/", 1)[-1], "clone_url_https_anon": url})
    return {"shortname": r.name, "tools": tools}


# -- corpus -------------------------------------------------------------------

EXTRA_ROWS = [
    ("Z1", "2019-02-02", "https://example.org/tool", "arxiv"),          # not a GHP
    ("Z2", "2019-02-03", "https://zenodo.org/record/1", "pmc"),         # not a GHP
    ("Z3", "2019-02-04", "https://gist.github.com/u/abc", "arxiv"),     # not a GHP
    ("Z4", "2019-02-05", "https://github.com/o", "arxiv"),              # user page, not a repository
    ("Z5", "2019-02-06", "https://sourceforge.net/directory/", "pmc"),  # not a repository
    ("Z6", "2019-13-01", "https://github.com/o/gh00", "arxiv"),         # invalid date
    ("Z7", "2019-02-07", "", "arxiv"),                                  # empty uri
]


def corpus_csv() -> str:
    rows = []
    for r in repos():
        rows.append((f"A-{r.name}", r.pub.isoformat(), r.canonical, "arxiv"))
        rows.append((f"B-{r.name}", r.deep_pub.isoformat(), r.deep, "pmc"))
        if r.duplicated:
            rows.append((f"A-{r.name}", r.pub.isoformat(), r.canonical, "arxiv"))
    rows += EXTRA_ROWS
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["article_id", "publication_date", "raw_uri", "corpus_tag"])
    w.writerows(rows)
    return buf.getvalue()


# -- server ---------------------------------------------------------------------

def registry_tsv(base: str) -> str:
    return "".join(f"{a}\t{a.upper()}\t{base}/arc/{a}/{{uri_r}}\n" for a in ARCHIVES)


def rewrites(base: str) -> dict[str, str]:
    return {h: f"{base}/live/{h}" for h in HOSTS.values()}


def _timemap(uri_r: str, archive: str, dates: list[date]) -> str:
    lines = [f'<{uri_r}>; rel="original"']
    for d in dates:
        stamp = _ts(d).strftime("%Y%m%d%H%M%S")
        lines.append(f'<http://{archive}.example/{stamp}/{uri_r}>; rel="memento"; datetime="{_http_date(d)}"')
    return ",\n".join(lines) + "\n"


def handler():
    live: dict[str, Reply] = {}
    timemaps: dict[tuple[str, str], Reply] = {}
    origins: dict[str, list[dict]] = {}
    failing: dict[str, Reply] = {}
    sf: dict[str, Reply] = {}
    for r in repos():
        for uri, is_live, web, mementos in ((r.canonical, r.live, r.web, canonical_mementos(r)),
                                            (r.deep, r.deep_live, r.deep_web, deep_mementos(r))):
            key = uri.split("://", 1)[1]
            live[key] = Reply(200, "<html>repo</html>") if is_live else Reply(404)
            for a in ARCHIVES:
                if web == "u":
                    timemaps[(a, uri)] = Reply(503)
                elif web == "y" and a in mementos:
                    timemaps[(a, uri)] = Reply(200, _timemap(uri, a, mementos[a]),
                                               {"Content-Type": "application/link-format"})
        if r.name == "gh04":  # renamed repository, still live through a redirect
            live["github.com/o/gh04"] = Reply(301, headers={"Location": "/o/gh04-renamed"})
            live["github.com/o/gh04-renamed"] = Reply(200)
        if r.platform == "bitbucket" and r.index == 3:
            live["bitbucket.org/o/bb03"] = Reply(302, headers={"Location": "/account/signin"})
        if r.name == "gh05":
            timemaps[("ukwa", r.canonical)] = Reply(503)
        if r.platform == "sourceforge":
            sf[r.name] = Reply(200, json.dumps(sf_document(r)), {"Content-Type": "application/json"})
            for url in sf_access_urls(r):
                if r.swh == "y" and "git." in url:
                    origins[url] = swh_visits(r)
        elif r.swh == "y":
            origin = r.canonical + (".git" if r.platform == "gitlab" and r.index in GITLAB_DOT_GIT else "")
            origins[origin] = swh_visits(r)
        elif r.swh == "u":
            failing[f"/swh/api/1/origin/{r.canonical}/get/"] = Reply(503)
    swh = swh_handler(origins, prefix="/swh", failing=failing)

    def handle(path: str) -> Reply:
        if path.startswith("/live/"):
            return live.get(path[len("/live/"):], Reply(404))
        if path.startswith("/arc/"):
            archive, _, uri = path[len("/arc/"):].partition("/")
            return timemaps.get((archive, uri), Reply(404))
        if path.startswith("/swh/"):
            return swh(path)
        if path.startswith("/sfapi/p/"):
            return sf.get(path[len("/sfapi/p/"):], Reply(404))
        return Reply(404)

    return handle
