"""Pipeline orchestration: ingest, the three tests, classification, timing analysis and reports."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Any, Callable

from . import corpus, memento
from .cache import ObservationCache
from .classification import ArchiveCoverage, Tri, classify
from .ghp_uri import Platform
from .http import DEFAULT_USER_AGENT, HttpClient, HttpConfig
from .liveness import LivenessResult, ProbePolicy, probe
from .reporting import (
    CorpusStats, CoverageReport, RepoAudit, TemporalResults, UriAudit, analyze_temporal, build_report, export,
    summary_text,
)
from .sourceforge import SfSwhStatus, SourceForgeClient, project_records, swh_status_for_project
from .swh import SwhClient
from .temporal import SWH_CUTOFF

log = logging.getLogger(__name__)

TESTS = ("liveness", "swh", "web")

ENV_SWH_URL = "GHP_AUDIT_SWH_URL"
ENV_SF_URL = "GHP_AUDIT_SF_URL"
ENV_REGISTRY = "GHP_AUDIT_REGISTRY"
ENV_RESOLVE = "GHP_AUDIT_RESOLVE"

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_UNKNOWNS = 2


class ConfigError(ValueError):
    pass


class IncompleteAudit(RuntimeError):
    """A cache-only stage needed an observation that was never made."""


def parse_rewrites(text: str) -> dict[str, str]:
    """``host=base,host=base`` into a mapping."""
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        host, sep, base = item.partition("=")
        if not sep or not host or not base:
            raise ConfigError(f"bad host rewrite {item!r}; expected host=http://base")
        out[host.strip().lower()] = base.strip()
    return out


@dataclass
class RunConfig:
    input_path: Path
    cache_dir: Path
    output_dir: Path = Path("out")
    input_format: str | None = None
    registry_path: Path | None = None
    concurrency: int = 4
    host_interval: float = 1.0
    timeout: float = 30.0
    archive_timeout: float = 30.0
    retries: int = 2
    backoff: float = 0.5
    max_redirects: int = 10
    swh_cutoff: date = SWH_CUTOFF
    offline: bool = False
    user_agent: str = DEFAULT_USER_AGENT
    swh_base_url: str = "https://archive.softwareheritage.org"
    sf_base_url: str = "https://sourceforge.net/rest"
    rewrites: dict[str, str] = field(default_factory=dict)
    count_all_visits: bool = False
    refetch_unknown: bool = False
    tests: tuple[str, ...] = TESTS

    def __post_init__(self):
        self.input_path = Path(self.input_path)
        self.cache_dir = Path(self.cache_dir)
        self.output_dir = Path(self.output_dir)
        if self.registry_path is not None:
            self.registry_path = Path(self.registry_path)
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        if self.host_interval < 0 or self.backoff < 0:
            raise ConfigError("intervals must be >= 0")
        if self.timeout <= 0 or self.archive_timeout <= 0:
            raise ConfigError("timeouts must be > 0")
        if self.retries < 0 or self.max_redirects < 0:
            raise ConfigError("retry and redirect counts must be >= 0")
        unknown = set(self.tests) - set(TESTS)
        if unknown:
            raise ConfigError(f"unknown tests {sorted(unknown)}; choose from {TESTS}")

    def apply_env(self, env: dict[str, str] | None = None) -> "RunConfig":
        env = os.environ if env is None else env
        if env.get(ENV_SWH_URL):
            self.swh_base_url = env[ENV_SWH_URL]
        if env.get(ENV_SF_URL):
            self.sf_base_url = env[ENV_SF_URL]
        if env.get(ENV_REGISTRY):
            self.registry_path = Path(env[ENV_REGISTRY])
        if env.get(ENV_RESOLVE):
            self.rewrites = {**parse_rewrites(env[ENV_RESOLVE]), **self.rewrites}
        return self


class ReadOnlyCache(ObservationCache):
    """Serves recorded observations; a miss raises ``IncompleteAudit``."""

    def __init__(self, inner: ObservationCache):
        self.__dict__.update(inner.__dict__)

    def fetch(self, kind, target, endpoint, producer, stale=None):
        payload = self.get(kind, target, endpoint)
        if payload is None:
            raise IncompleteAudit(f"no cached {kind} observation for {target}")
        return payload


@dataclass
class Ingested:
    load: corpus.LoadResult
    grouping: corpus.GroupingResult

    @property
    def stats(self) -> CorpusStats:
        return CorpusStats(
            rows=self.load.row_count,
            records=len(self.load.records),
            rejects=len(self.load.rejects),
            duplicates=self.grouping.duplicates,
            skipped_non_ghp=len(self.grouping.skipped_non_ghp),
            not_repository=len(self.grouping.not_repository),
        )


def ingest(config: RunConfig) -> Ingested:
    load = corpus.load_citations(config.input_path, config.input_format)
    return Ingested(load, corpus.group_by_canonical(load.records))


class Auditor:
    """Runs the three tests for repository groups, every observation through the cache."""

    def __init__(self, config: RunConfig, cache: ObservationCache, network: bool = True):
        self.config = config
        self.cache = cache if network else ReadOnlyCache(cache)
        self.http = HttpClient(HttpConfig(
            user_agent=config.user_agent, timeout=config.timeout, retries=config.retries,
            backoff=config.backoff, min_interval=config.host_interval, offline=config.offline,
            rewrites=dict(config.rewrites),
        ))
        self.policy = ProbePolicy(max_redirects=config.max_redirects, retries=config.retries,
                                  backoff=config.backoff, timeout=config.timeout)
        self.swh = SwhClient(self.http, config.swh_base_url, self.cache, count_all=config.count_all_visits,
                             refetch_unknown=config.refetch_unknown)
        self.sf = SourceForgeClient(self.http, config.sf_base_url, self.cache,
                                    refetch_unknown=config.refetch_unknown)
        self.registry = memento.load_registry(config.registry_path)
        self._fetch_timemap = memento.http_fetcher(self.http, config.archive_timeout)

    @property
    def request_count(self) -> int:
        return self.http.request_count

    # -- single observations ---------------------------------------------------

    def liveness(self, uri: str) -> LivenessResult:
        payload = self.cache.fetch("liveness", uri, None, lambda: probe(uri, self.policy, self.http).to_dict())
        return LivenessResult.from_dict(payload)

    def _archive_response(self, endpoint: memento.ArchiveEndpoint, uri_r: str) -> memento.ArchiveResponse:
        payload = self.cache.fetch(
            "timemap", uri_r, endpoint.id,
            lambda: self._fetch_timemap(endpoint, uri_r).to_dict(),
            lambda p: self.config.refetch_unknown and p.get("error") is not None,
        )
        return memento.ArchiveResponse.from_dict(payload)

    def timemap(self, uri_r: str) -> memento.TimeMapSummary:
        return memento.aggregate(uri_r, self.registry, self._archive_response,
                                 max_workers=min(len(self.registry), 12))

    def swh_coverage(self, group: corpus.UriCitationGroup) -> tuple[Tri, bool, list[datetime]]:
        """(archived?, counts toward SWH coverage?, capture dates)."""
        if group.platform is Platform.SOURCEFORGE:
            name = group.canonical_uri.rsplit("/", 1)[-1]
            project = self.sf.fetch_access_urls(name)
            records = project_records(project, self.swh)
            status = swh_status_for_project(project, self.swh)
            captures = sorted(d for rec in records for d in rec.capture_dates(self.config.count_all_visits))
            if status is SfSwhStatus.EXCLUDED:
                return Tri.NO, False, []
            tri = {SfSwhStatus.ARCHIVED: Tri.YES, SfSwhStatus.NOT_ARCHIVED: Tri.NO}.get(status, Tri.UNKNOWN)
            return tri, True, captures
        record = self.swh.archival_record(group.canonical_uri)
        return Tri.of(record.archived), True, record.capture_dates(self.config.count_all_visits)

    # -- per group ---------------------------------------------------------------

    def run_tests(self, group: corpus.UriCitationGroup, tests: tuple[str, ...] = TESTS) -> None:
        """Make (and cache) the observations for the selected tests only."""
        if "liveness" in tests:
            for uri in _uris(group):
                self.liveness(uri)
        if "swh" in tests:
            self.swh_coverage(group)
        if "web" in tests:
            for uri in _uris(group):
                self.timemap(uri)

    def audit(self, group: corpus.UriCitationGroup) -> RepoAudit:
        repo_live = self.liveness(group.canonical_uri).active
        in_swh, eligible, swh_caps = self.swh_coverage(group)
        repo_tm = self.timemap(group.canonical_uri)
        in_web = Tri.of(repo_tm.archived)
        uris = []
        for uri, pub in group.originals.items():
            tm = repo_tm if uri == group.canonical_uri else self.timemap(uri)
            uris.append(UriAudit(uri, pub, self.liveness(uri).active, Tri.of(tm.archived),
                                 dict(tm.per_archive_counts), [m.memento_datetime for m in tm.mementos]))
        return RepoAudit(
            canonical_uri=group.canonical_uri,
            platform=group.platform,
            earliest_publication_date=group.earliest_publication_date,
            active=repo_live,
            in_swh=in_swh,
            in_web_archives=in_web,
            classification=classify(repo_live, ArchiveCoverage(in_swh, in_web)),
            swh_eligible=eligible,
            per_archive_counts=dict(repo_tm.per_archive_counts),
            swh_captures=swh_caps,
            web_captures=[m.memento_datetime for m in repo_tm.mementos],
            uris=uris,
        )


def _uris(group: corpus.UriCitationGroup) -> list[str]:
    return sorted({group.canonical_uri, *group.originals})


def _map(fn: Callable[[Any], Any], items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_audit(config: RunConfig, ingested: Ingested | None = None,
              cache: ObservationCache | None = None) -> tuple[int, int]:
    """Network stage: make every uncached observation. Returns (groups, requests issued)."""
    ingested = ingested or ingest(config)
    cache = cache if cache is not None else ObservationCache(config.cache_dir)
    auditor = Auditor(config, cache, network=True)
    _map(lambda g: auditor.run_tests(g, config.tests), ingested.grouping.groups, config.concurrency)
    return len(ingested.grouping.groups), auditor.request_count


def collect(config: RunConfig, ingested: Ingested, cache: ObservationCache,
            network: bool = False) -> tuple[list[RepoAudit], int]:
    auditor = Auditor(config, cache, network=network)
    repos = _map(auditor.audit, ingested.grouping.groups, config.concurrency if network else 1)
    return sorted(repos, key=lambda r: (r.platform.value, r.canonical_uri)), auditor.request_count


@dataclass
class PipelineResult:
    exit_code: int
    report: CoverageReport
    temporal: TemporalResults
    repos: list[RepoAudit]
    requests: int
    files: list[Path]


def write_outputs(config: RunConfig, report: CoverageReport, temporal: TemporalResults,
                  ingested: Ingested) -> list[Path]:
    files = export(report, temporal, "json", config.output_dir)
    files += export(report, temporal, "csv", config.output_dir)
    rejects = config.output_dir / "rejects.csv"
    corpus.write_rejects(ingested.load.rejects, rejects, "delimited")
    summary = config.output_dir / "summary.txt"
    summary.write_text(summary_text(report), encoding="utf-8", newline="\n")
    return files + [rejects, summary]


def run_pipeline(config: RunConfig, network: bool = True) -> PipelineResult:
    """ingest -> three tests -> classify -> timing -> report.

    With ``network`` false every observation must already be cached.
    """
    ingested = ingest(config)
    cache = ObservationCache(config.cache_dir)
    repos, requests = collect(config, ingested, cache, network=network)
    temporal = analyze_temporal(repos, config.swh_cutoff)
    report = build_report(repos, ingested.stats, temporal)
    files = write_outputs(config, report, temporal, ingested)
    code = EXIT_UNKNOWNS if report.unknowns else EXIT_OK
    log.info("pipeline finished: %d repositories, %d requests, exit %d", len(repos), requests, code)
    return PipelineResult(code, report, temporal, repos, requests, files)
