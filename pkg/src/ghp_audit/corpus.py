"""Citation corpus loading, validation and grouping by canonical repository."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

from .ghp_uri import GhpUri, NotGhp, NotRepository, ParseResult, Platform, comparison_key, parse

log = logging.getLogger(__name__)

FIELDS = ("article_id", "publication_date", "raw_uri", "corpus_tag")
REQUIRED = ("article_id", "publication_date", "raw_uri")


class InputFormat(str, Enum):
    DELIMITED = "delimited"
    RECORD_PER_LINE = "record-per-line"

    @classmethod
    def for_path(cls, path: str | Path) -> "InputFormat":
        suffix = Path(path).suffix.lower()
        return cls.RECORD_PER_LINE if suffix in (".jsonl", ".ndjson", ".json") else cls.DELIMITED


class CorpusError(Exception):
    """Corpus file cannot be read at all."""


@dataclass(frozen=True, order=True)
class CitationRecord:
    article_id: str
    publication_date: date
    raw_uri: str
    corpus_tag: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["publication_date"] = self.publication_date.isoformat()
        return d


@dataclass(frozen=True)
class Reject:
    line: int
    row: dict
    reason: str


@dataclass
class LoadResult:
    records: list[CitationRecord]
    rejects: list[Reject]

    @property
    def row_count(self) -> int:
        return len(self.records) + len(self.rejects)


def parse_date(text: str) -> date:
    """Parse ``YYYY-MM-DD`` or ``YYYY-MM``; month-only dates become the 1st."""
    text = text.strip()
    if len(text) == 7 and text[4] == "-":
        return date.fromisoformat(text + "-01")
    if len(text) != 10:
        raise ValueError(text)
    return date.fromisoformat(text)


def _record_from_row(row: dict) -> CitationRecord:
    missing = [k for k in REQUIRED if not str(row.get(k) or "").strip()]
    if "raw_uri" in missing:
        raise ValueError("empty uri")
    if missing:
        raise ValueError(f"missing {', '.join(missing)}")
    try:
        pub = parse_date(str(row["publication_date"]))
    except ValueError:
        raise ValueError("invalid date") from None
    return CitationRecord(
        article_id=str(row["article_id"]).strip(),
        publication_date=pub,
        raw_uri=str(row["raw_uri"]).strip(),
        corpus_tag=str(row.get("corpus_tag") or "").strip(),
    )


def _iter_rows(path: Path, fmt: InputFormat) -> Iterable[tuple[int, dict | None, str]]:
    """Yield (line number, row or None, raw text) pairs."""
    with path.open(encoding="utf-8", newline="") as fh:
        if fmt is InputFormat.DELIMITED:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return
            absent = [k for k in REQUIRED if k not in reader.fieldnames]
            if absent:
                raise CorpusError(f"{path}: header lacks {', '.join(absent)}")
            for row in reader:
                extra = row.pop(None, None)
                yield reader.line_num, (None if extra else row), ""
        else:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError:
                    yield lineno, None, line.rstrip("\n")
                    continue
                yield lineno, obj if isinstance(obj, dict) else None, line.rstrip("\n")


def load_citations(path: str | Path, fmt: InputFormat | str | None = None) -> LoadResult:
    path = Path(path)
    fmt = InputFormat(fmt) if fmt is not None else InputFormat.for_path(path)
    records: list[CitationRecord] = []
    rejects: list[Reject] = []
    try:
        for lineno, row, text in _iter_rows(path, fmt):
            if row is None:
                rejects.append(Reject(lineno, {"raw": text}, "malformed row"))
                continue
            try:
                records.append(_record_from_row(row))
            except ValueError as exc:
                rejects.append(Reject(lineno, {k: row.get(k, "") for k in FIELDS}, str(exc)))
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path} is not UTF-8: {exc}") from exc
    if rejects:
        log.info("%s: %d records, %d rejects", path, len(records), len(rejects))
    return LoadResult(records, rejects)


def write_rejects(rejects: Iterable[Reject], path: str | Path, fmt: InputFormat | str) -> None:
    fmt = InputFormat(fmt)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if fmt is InputFormat.DELIMITED:
            writer = csv.DictWriter(fh, fieldnames=[*FIELDS, "reason"], extrasaction="ignore", lineterminator="\n")
            writer.writeheader()
            for r in rejects:
                writer.writerow({**{k: r.row.get(k, "") for k in FIELDS}, "reason": r.reason})
        else:
            for r in rejects:
                fh.write(json.dumps({**r.row, "reason": r.reason}, sort_keys=True) + "\n")


@dataclass
class UriCitationGroup:
    canonical_uri: str
    platform: Platform
    earliest_publication_date: date
    citations: list[CitationRecord]
    # original (as-cited) URI -> earliest publication citing that exact form
    originals: dict[str, date] = field(default_factory=dict)


@dataclass
class GroupingResult:
    groups: list[UriCitationGroup]
    skipped_non_ghp: list[tuple[CitationRecord, str]]
    not_repository: list[tuple[CitationRecord, str]]
    duplicates: int

    @property
    def citation_count(self) -> int:
        return sum(len(g.citations) for g in self.groups)


def group_by_canonical(
    records: Iterable[CitationRecord],
    canonicalizer: Callable[[str], ParseResult] = parse,
) -> GroupingResult:
    """Group citations by repository; result does not depend on input order."""
    records = list(records)
    unique = sorted(set(records))
    duplicates = len(records) - len(unique)
    buckets: dict[tuple[Platform, str], list[tuple[CitationRecord, GhpUri]]] = {}
    skipped: list[tuple[CitationRecord, str]] = []
    not_repo: list[tuple[CitationRecord, str]] = []
    seen: set[tuple] = set()
    for rec in unique:
        parsed = canonicalizer(rec.raw_uri)
        if isinstance(parsed, NotGhp):
            skipped.append((rec, parsed.reason))
            continue
        if isinstance(parsed, NotRepository):
            not_repo.append((rec, parsed.reason))
            continue
        key = (parsed.platform, comparison_key(parsed))
        # same article citing the same exact URI twice (e.g. under two corpus tags)
        ident = (rec.article_id, rec.publication_date, parsed.original_uri)
        if ident in seen:
            duplicates += 1
            continue
        seen.add(ident)
        buckets.setdefault(key, []).append((rec, parsed))

    groups = []
    for (platform, _), members in sorted(buckets.items(), key=lambda kv: (kv[0][0].value, kv[0][1])):
        originals: dict[str, date] = {}
        for rec, p in members:
            prev = originals.get(p.original_uri)
            originals[p.original_uri] = rec.publication_date if prev is None else min(prev, rec.publication_date)
        groups.append(UriCitationGroup(
            canonical_uri=min(p.canonical_repo_uri for _, p in members),
            platform=platform,
            earliest_publication_date=min(r.publication_date for r, _ in members),
            citations=[r for r, _ in members],
            originals=dict(sorted(originals.items())),
        ))
    return GroupingResult(groups, skipped, not_repo, duplicates)
