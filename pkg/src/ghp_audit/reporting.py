"""Corpus-level coverage report and plot-data export.

Every percentage is carried with its numerator and denominator, rounded
half-up to two decimals. Unknown and indeterminate outcomes get their own
columns and are never folded into "not archived".
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from datetime import date, datetime
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from pathlib import Path
from typing import Iterable

from .classification import Quadrant, ResourceClassification, Status, Tri
from .ghp_uri import Platform
from .temporal import (
    SWH_CUTOFF, ArchiveKind, CaptureDelta, MonthlyRow, StaleGap, capture_deltas, day_summary,
    monthly_aggregate, recaptured, stale_gaps,
)

ALL = "All"
PLATFORM_ORDER = [p.value for p in Platform]


class ReportError(ValueError):
    pass


def percent(numerator: int, denominator: int) -> float | None:
    """100 * num / den rounded half-up to two decimals; None for an empty denominator."""
    if denominator == 0:
        return None
    value = (Decimal(numerator) * 100 / Decimal(denominator)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return float(value)


@dataclass(frozen=True)
class Ratio:
    numerator: int
    denominator: int
    percent: float | None = None

    @classmethod
    def of(cls, numerator: int, denominator: int) -> "Ratio":
        return cls(numerator, denominator, percent(numerator, denominator))


# -- per-resource inputs ------------------------------------------------------

@dataclass
class UriAudit:
    """One cited URI as written (URI-level granularity)."""

    uri: str
    publication_date: date
    active: bool
    in_web_archives: Tri
    per_archive_counts: dict[str, int] = field(default_factory=dict)
    captures: list[datetime] = field(default_factory=list)


@dataclass
class RepoAudit:
    """One repository-level URI with its three test outcomes."""

    canonical_uri: str
    platform: Platform
    earliest_publication_date: date
    active: bool
    in_swh: Tri
    in_web_archives: Tri
    classification: ResourceClassification
    swh_eligible: bool = True
    per_archive_counts: dict[str, int] = field(default_factory=dict)
    swh_captures: list[datetime] = field(default_factory=list)
    web_captures: list[datetime] = field(default_factory=list)
    uris: list[UriAudit] = field(default_factory=list)


@dataclass
class CorpusStats:
    rows: int = 0
    records: int = 0
    rejects: int = 0
    duplicates: int = 0
    skipped_non_ghp: int = 0
    not_repository: int = 0


# -- report ---------------------------------------------------------------------

@dataclass
class PlatformRow:
    platform: str
    uri_count: int
    repo_count: int
    active: Ratio
    active_repo: Ratio
    swh_archived: Ratio
    swh_unknown: Ratio
    swh_excluded: int
    wa_archived_uri: Ratio
    wa_unknown_uri: Ratio
    wa_archived_repo: Ratio
    wa_unknown_repo: Ratio
    quadrants: dict[str, Ratio]
    rotten_quadrants: dict[str, Ratio]
    statuses: dict[str, Ratio]


@dataclass
class TemporalSummary:
    kind: str
    granularity: str
    cutoff: str | None
    deltas: int
    mean_delta_days: float | None
    median_delta_days: float | None
    stale: int
    mean_stale_days: float | None
    recaptured: int
    monthly: list[MonthlyRow]


@dataclass
class CoverageReport:
    corpus: CorpusStats
    platform_uris: dict[str, Ratio]
    rows: list[PlatformRow]
    memento_share: dict[str, dict[str, Ratio]]
    temporal: list[TemporalSummary]
    unknowns: int = 0

    def row(self, platform: str = ALL) -> PlatformRow:
        for r in self.rows:
            if r.platform == platform:
                return r
        raise KeyError(platform)

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    @classmethod
    def from_dict(cls, d: dict) -> "CoverageReport":
        def ratio(x):
            return Ratio(**x)

        def ratios(m):
            return {k: ratio(v) for k, v in m.items()}

        rows = []
        for r in d["rows"]:
            r = dict(r)
            for k in ("active", "active_repo", "swh_archived", "swh_unknown", "wa_archived_uri",
                      "wa_unknown_uri", "wa_archived_repo", "wa_unknown_repo"):
                r[k] = ratio(r[k])
            for k in ("quadrants", "rotten_quadrants", "statuses"):
                r[k] = ratios(r[k])
            rows.append(PlatformRow(**r))
        temporal = [TemporalSummary(**{**t, "monthly": [MonthlyRow(**m) for m in t["monthly"]]})
                    for t in d["temporal"]]
        return cls(
            corpus=CorpusStats(**d["corpus"]),
            platform_uris=ratios(d["platform_uris"]),
            rows=rows,
            memento_share={g: ratios(m) for g, m in d["memento_share"].items()},
            temporal=temporal,
            unknowns=d.get("unknowns", 0),
        )


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k.value if isinstance(k, Enum) else k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (date, datetime)):
        return obj.isoformat()
    return obj


def _tally(items: Iterable, key) -> dict[str, int]:
    items = list(items)
    counts: dict[str, int] = {}
    for it in items:
        k = key(it)
        counts[k] = counts.get(k, 0) + 1
    return counts


def _row(platform: str, repos: list[RepoAudit]) -> PlatformRow:
    uris = [u for r in repos for u in r.uris]
    eligible = [r for r in repos if r.swh_eligible]
    rotten = [r for r in repos if not r.active]

    def quad(rs):
        counts = _tally(rs, lambda r: r.classification.coverage_quadrant.value)
        return {q.value: Ratio.of(counts.get(q.value, 0), len(rs)) for q in Quadrant}

    statuses = _tally(repos, lambda r: r.classification.status.value)
    return PlatformRow(
        platform=platform,
        uri_count=len(uris),
        repo_count=len(repos),
        active=Ratio.of(sum(u.active for u in uris), len(uris)),
        active_repo=Ratio.of(sum(r.active for r in repos), len(repos)),
        swh_archived=Ratio.of(sum(r.in_swh is Tri.YES for r in eligible), len(eligible)),
        swh_unknown=Ratio.of(sum(r.in_swh is Tri.UNKNOWN for r in eligible), len(eligible)),
        swh_excluded=len(repos) - len(eligible),
        wa_archived_uri=Ratio.of(sum(u.in_web_archives is Tri.YES for u in uris), len(uris)),
        wa_unknown_uri=Ratio.of(sum(u.in_web_archives is Tri.UNKNOWN for u in uris), len(uris)),
        wa_archived_repo=Ratio.of(sum(r.in_web_archives is Tri.YES for r in repos), len(repos)),
        wa_unknown_repo=Ratio.of(sum(r.in_web_archives is Tri.UNKNOWN for r in repos), len(repos)),
        quadrants=quad(repos),
        rotten_quadrants=quad(rotten),
        statuses={s.value: Ratio.of(statuses.get(s.value, 0), len(repos)) for s in Status},
    )


def _share(counts: Iterable[dict[str, int]]) -> dict[str, Ratio]:
    totals: dict[str, int] = {}
    for c in counts:
        for k, v in c.items():
            totals[k] = totals.get(k, 0) + v
    grand = sum(totals.values())
    return {k: Ratio.of(v, grand) for k, v in sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))}


@dataclass
class TemporalResults:
    """Delta and stale-gap rows per (kind, granularity) label."""

    deltas: dict[str, list[CaptureDelta]] = field(default_factory=dict)
    stale: dict[str, list[StaleGap]] = field(default_factory=dict)
    recaptured: dict[str, int] = field(default_factory=dict)
    cutoffs: dict[str, date | None] = field(default_factory=dict)


TEMPORAL_LABELS = {
    "swh_repo": (ArchiveKind.SWH, "repository"),
    "web_repo": (ArchiveKind.WEB, "repository"),
    "web_uri": (ArchiveKind.WEB, "uri"),
}


def analyze_temporal(repos: list[RepoAudit], swh_cutoff: date | None = SWH_CUTOFF) -> TemporalResults:
    """Capture deltas and stale gaps for SWH (repository level, with cutoff) and web archives (both levels)."""
    res = TemporalResults()
    inputs = {
        "swh_repo": ([(r.canonical_uri, r.earliest_publication_date) for r in repos],
                     {r.canonical_uri: r.swh_captures for r in repos}, swh_cutoff),
        "web_repo": ([(r.canonical_uri, r.earliest_publication_date) for r in repos],
                     {r.canonical_uri: r.web_captures for r in repos}, None),
        "web_uri": ([(u.uri, u.publication_date) for r in repos for u in r.uris],
                    {u.uri: u.captures for r in repos for u in r.uris}, None),
    }
    for label, (cited, histories, cutoff) in inputs.items():
        kind = TEMPORAL_LABELS[label][0]
        res.deltas[label] = capture_deltas(cited, histories, kind, cutoff)
        res.stale[label] = stale_gaps(cited, histories, kind, cutoff)
        res.recaptured[label] = len(recaptured(cited, histories, cutoff))
        res.cutoffs[label] = cutoff
    return res


def build_report(repos: list[RepoAudit], corpus: CorpusStats | None = None,
                 temporal: TemporalResults | None = None) -> CoverageReport:
    if not repos:
        raise ReportError("empty corpus: no repository-level GHP URIs to report on")
    corpus = corpus or CorpusStats()
    by_platform: dict[str, list[RepoAudit]] = {p: [] for p in PLATFORM_ORDER}
    for r in sorted(repos, key=lambda r: (r.platform.value, r.canonical_uri)):
        by_platform[r.platform.value].append(r)
    rows = [_row(ALL, [r for p in PLATFORM_ORDER for r in by_platform[p]])]
    rows += [_row(p, by_platform[p]) for p in PLATFORM_ORDER if by_platform[p]]
    total_uris = rows[0].uri_count
    platform_uris = {row.platform: Ratio.of(row.uri_count, total_uris) for row in rows[1:]}
    share = {
        "uri": _share(u.per_archive_counts for r in repos for u in r.uris),
        "repository": _share(r.per_archive_counts for r in repos),
    }
    summaries = []
    if temporal is not None:
        for label, (kind, granularity) in TEMPORAL_LABELS.items():
            deltas = temporal.deltas.get(label, [])
            stale = temporal.stale.get(label, [])
            ds = day_summary(d.delta_days for d in deltas)
            ss = day_summary(g.gap_days for g in stale)
            cutoff = temporal.cutoffs.get(label)
            summaries.append(TemporalSummary(
                kind=kind.value, granularity=granularity,
                cutoff=cutoff.isoformat() if cutoff else None,
                deltas=ds.count, mean_delta_days=_round(ds.mean_days), median_delta_days=_round(ds.median_days),
                stale=ss.count, mean_stale_days=_round(ss.mean_days),
                recaptured=temporal.recaptured.get(label, 0),
                monthly=[MonthlyRow(m.month, m.count, m.min, m.median, _round(m.mean), m.max)
                         for m in monthly_aggregate(deltas)],
            ))
    unknowns = sum(
        r.classification.status is Status.INDETERMINATE or Tri.UNKNOWN in (r.in_swh, r.in_web_archives)
        or any(u.in_web_archives is Tri.UNKNOWN for u in r.uris)
        for r in repos
    )
    return CoverageReport(corpus, platform_uris, rows, share, summaries, unknowns)


def _round(x: float | None) -> float | None:
    if x is None:
        return None
    return float(Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


# -- export ------------------------------------------------------------------

def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _csv(header: list[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def _fmt(p: float | None) -> str:
    return "" if p is None else f"{p:.2f}"


def plot_tables(report: CoverageReport, temporal: TemporalResults | None = None) -> dict[str, str]:
    """CSV plot-data files keyed by file name."""
    ratio_cols = ["platform", "category", "numerator", "denominator", "percent"]
    files = {}
    files["platform_share.csv"] = _csv(
        ["platform", "uri_count", "percent"],
        [(p, r.numerator, _fmt(r.percent)) for p, r in report.platform_uris.items()])
    three = []
    for row in report.rows:
        for name in ("active", "swh_archived", "swh_unknown", "wa_archived_uri", "wa_unknown_uri",
                     "wa_archived_repo", "wa_unknown_repo"):
            r = getattr(row, name)
            three.append((row.platform, name, r.numerator, r.denominator, _fmt(r.percent)))
    files["three_tests.csv"] = _csv(ratio_cols, three)
    for fname, attr in (("quadrants.csv", "quadrants"), ("rotten_quadrants.csv", "rotten_quadrants"),
                        ("statuses.csv", "statuses")):
        files[fname] = _csv(ratio_cols, [
            (row.platform, k, r.numerator, r.denominator, _fmt(r.percent))
            for row in report.rows for k, r in getattr(row, attr).items()])
    files["archive_share.csv"] = _csv(
        ["granularity", "archive_id", "mementos", "total", "percent"],
        [(g, a, r.numerator, r.denominator, _fmt(r.percent))
         for g, share in report.memento_share.items() for a, r in share.items()])
    monthly_names = {"swh_repo": "swh_monthly.csv", "web_repo": "web_monthly.csv",
                     "web_uri": "web_monthly_uri.csv"}
    for t in report.temporal:
        label = f"{t.kind}_{'repo' if t.granularity == 'repository' else 'uri'}"
        files[monthly_names[label]] = _csv(
            ["month", "min", "median", "mean", "max"],
            [(m.month, m.min, m.median, f"{m.mean:.2f}", m.max) for m in t.monthly])
    if temporal is not None:
        files["capture_deltas.csv"] = _csv(
            ["series", "uri", "publication_date", "first_capture", "delta_days", "delta_months"],
            [(label, d.canonical_uri, d.publication_date.isoformat(), d.first_capture.isoformat(),
              d.delta_days, d.delta_months)
             for label in sorted(temporal.deltas) for d in temporal.deltas[label]])
        files["stale_gaps.csv"] = _csv(
            ["series", "uri", "publication_date", "last_capture_before_pub", "gap_days"],
            [(label, g.canonical_uri, g.publication_date.isoformat(), g.last_capture_before_pub.isoformat(),
              g.gap_days)
             for label in sorted(temporal.stale) for g in temporal.stale[label]])
    return files


def summary_text(report: CoverageReport) -> str:
    lines = []
    c = report.corpus
    lines.append(f"corpus: {c.rows} rows, {c.records} records, {c.rejects} rejects, "
                 f"{c.skipped_non_ghp} non-GHP, {c.not_repository} non-repository, {c.duplicates} duplicates")
    for row in report.rows:
        q = row.quadrants
        lines.append(
            f"{row.platform:<12} uris={row.uri_count} repos={row.repo_count} "
            f"active={_fmt(row.active.percent)}% swh={_fmt(row.swh_archived.percent)}% "
            f"(excluded {row.swh_excluded}, unknown {row.swh_unknown.numerator}) "
            f"wa_uri={_fmt(row.wa_archived_uri.percent)}% wa_repo={_fmt(row.wa_archived_repo.percent)}% "
            f"both={_fmt(q['Both'].percent)}% swh_only={_fmt(q['SwhOnly'].percent)}% "
            f"web_only={_fmt(q['WebOnly'].percent)}% neither={_fmt(q['Neither'].percent)}% "
            f"indeterminate={_fmt(q['Indeterminate'].percent)}%")
    for t in report.temporal:
        lines.append(
            f"{t.kind}/{t.granularity}: {t.deltas} deltas (mean {t.mean_delta_days} d, median "
            f"{t.median_delta_days} d), {t.stale} stale (mean gap {t.mean_stale_days} d), {t.recaptured} recaptured")
    lines.append(f"resources with unknown outcomes: {report.unknowns}")
    return "\n".join(lines) + "\n"


def export(report: CoverageReport, temporal: TemporalResults | None, fmt: str, outdir: str | Path) -> list[Path]:
    """Write the report as ``json`` (report.json) or ``csv`` (plot-data tables).

    Output bytes depend only on the inputs.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        files = {"report.json": _dump_json(report.to_dict())}
    elif fmt == "csv":
        files = plot_tables(report, temporal)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    written = []
    for name, text in files.items():
        path = outdir / name
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written.append(path)
    return written


def load_report(path: str | Path) -> CoverageReport:
    return CoverageReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
