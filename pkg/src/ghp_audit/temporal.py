"""Publication-to-capture timing: first-capture deltas, stale gaps and monthly statistics."""

from __future__ import annotations

import statistics
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, datetime
from enum import Enum
from typing import Iterable, Mapping, Sequence

# Software Heritage went public on 2016-06-30; earlier publications could not
# have been captured before citation.
SWH_CUTOFF = date(2016, 7, 1)


class ArchiveKind(str, Enum):
    SWH = "swh"
    WEB = "web"


@dataclass(frozen=True)
class CaptureDelta:
    canonical_uri: str
    publication_date: date
    first_capture: datetime
    delta_days: int
    delta_months: int
    archive_kind: ArchiveKind


@dataclass(frozen=True)
class StaleGap:
    canonical_uri: str
    last_capture_before_pub: datetime
    publication_date: date
    gap_days: int
    archive_kind: ArchiveKind


@dataclass(frozen=True)
class MonthlyRow:
    month: str
    count: int
    min: int
    median: float
    mean: float
    max: int


def month_index(d: date) -> int:
    return d.year * 12 + d.month


def _day(ts: date | datetime) -> date:
    return ts.date() if isinstance(ts, datetime) else ts


def _cited(groups: Iterable) -> list[tuple[str, date]]:
    out = []
    for g in groups:
        if hasattr(g, "canonical_uri"):
            out.append((g.canonical_uri, g.earliest_publication_date))
        else:
            uri, pub = g
            out.append((uri, pub))
    return out


def _eligible(groups, histories, cutoff):
    for uri, pub in _cited(groups):
        if cutoff is not None and pub < cutoff:
            continue
        caps = sorted(histories.get(uri) or ())
        if caps:
            yield uri, pub, caps


def capture_deltas(groups: Iterable, histories: Mapping[str, Sequence[datetime]], kind: ArchiveKind,
                   cutoff: date | None = None) -> list[CaptureDelta]:
    """Delays from first citation to first capture, for URIs not captured before citation.

    ``groups`` holds ``UriCitationGroup`` objects or ``(uri, publication_date)``
    pairs. Publications before ``cutoff`` are ignored.
    """
    kind = ArchiveKind(kind)
    out = []
    for uri, pub, caps in _eligible(groups, histories, cutoff):
        first = caps[0]
        first_day = _day(first)
        if first_day < pub:
            continue
        out.append(CaptureDelta(uri, pub, first, (first_day - pub).days,
                                month_index(first_day) - month_index(pub), kind))
    return sorted(out, key=lambda d: (d.publication_date, d.canonical_uri))


def stale_gaps(groups: Iterable, histories: Mapping[str, Sequence[datetime]], kind: ArchiveKind,
               cutoff: date | None = None) -> list[StaleGap]:
    """URIs captured before citation and never since, with the gap to the last capture."""
    kind = ArchiveKind(kind)
    out = []
    for uri, pub, caps in _eligible(groups, histories, cutoff):
        last = caps[-1]
        if _day(last) >= pub:
            continue
        out.append(StaleGap(uri, last, pub, (pub - _day(last)).days, kind))
    return sorted(out, key=lambda g: (g.publication_date, g.canonical_uri))


def recaptured(groups: Iterable, histories: Mapping[str, Sequence[datetime]],
               cutoff: date | None = None) -> list[str]:
    """URIs captured both before and on/after their first citation."""
    return sorted(uri for uri, pub, caps in _eligible(groups, histories, cutoff)
                  if _day(caps[0]) < pub <= _day(caps[-1]))


def monthly_aggregate(deltas: Iterable[CaptureDelta]) -> list[MonthlyRow]:
    """Min/median/mean/max of month deltas per publication month; empty months omitted."""
    buckets: dict[str, list[int]] = defaultdict(list)
    for d in deltas:
        buckets[f"{d.publication_date.year:04d}-{d.publication_date.month:02d}"].append(d.delta_months)
    rows = []
    for month in sorted(buckets):
        vals = buckets[month]
        rows.append(MonthlyRow(month, len(vals), min(vals), float(statistics.median(vals)),
                               statistics.fmean(vals), max(vals)))
    return rows


@dataclass(frozen=True)
class DaySummary:
    count: int
    mean_days: float | None
    median_days: float | None


def day_summary(values: Iterable[int]) -> DaySummary:
    vals = list(values)
    if not vals:
        return DaySummary(0, None, None)
    return DaySummary(len(vals), statistics.fmean(vals), float(statistics.median(vals)))
