"""Command-line interface.

Exit codes: 0 success, 1 fatal configuration/IO error, 2 completed with
Unknown outcomes.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import date
from pathlib import Path

from . import ghp_uri, pipeline
from .cache import ObservationCache
from .corpus import CorpusError, write_rejects
from .http import OfflineError
from .reporting import ReportError, TemporalResults, analyze_temporal, build_report, plot_tables

log = logging.getLogger("ghp_audit")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", type=Path, help="citation corpus (CSV with header, or JSON lines)")
    p.add_argument("--format", dest="input_format", choices=["delimited", "record-per-line"],
                   help="input format (default: from file extension)")
    p.add_argument("--cache", dest="cache_dir", type=Path, default=Path(".ghp-audit-cache"))
    p.add_argument("--out", dest="output_dir", type=Path, default=Path("out"))
    p.add_argument("--registry", dest="registry_path", type=Path,
                   help="web archive registry (id<TAB>name<TAB>template per line)")
    p.add_argument("--concurrency", type=int, default=4)
    p.add_argument("--host-interval", type=float, default=1.0,
                   help="minimum seconds between requests to one host")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--archive-timeout", type=float, default=30.0)
    p.add_argument("--retries", type=int, default=2)
    p.add_argument("--backoff", type=float, default=0.5)
    p.add_argument("--max-redirects", type=int, default=10)
    p.add_argument("--swh-cutoff", type=date.fromisoformat, default=pipeline.SWH_CUTOFF)
    p.add_argument("--offline", action="store_true", help="refuse any request to a non-loopback host")
    p.add_argument("--user-agent", default=pipeline.DEFAULT_USER_AGENT)
    p.add_argument("--swh-url", dest="swh_base_url", default="https://archive.softwareheritage.org")
    p.add_argument("--sf-url", dest="sf_base_url", default="https://sourceforge.net/rest")
    p.add_argument("--resolve", action="append", default=[], metavar="HOST=BASE",
                   help="send requests for HOST to BASE instead (fixtures); repeatable")
    p.add_argument("--count-all-visits", action="store_true",
                   help="count failed/partial Software Heritage visits as snapshots")
    p.add_argument("--refetch-unknown", action="store_true", help="re-query observations recorded as Unknown")


def _config(args: argparse.Namespace) -> pipeline.RunConfig:
    rewrites = {}
    for item in args.resolve:
        rewrites.update(pipeline.parse_rewrites(item))
    fields = {k: getattr(args, k) for k in (
        "input_path", "cache_dir", "output_dir", "input_format", "registry_path", "concurrency",
        "host_interval", "timeout", "archive_timeout", "retries", "backoff", "max_redirects", "swh_cutoff",
        "offline", "user_agent", "swh_base_url", "sf_base_url", "count_all_visits", "refetch_unknown",
    ) if k != "input_path"}
    tests = tuple(args.tests.split(",")) if getattr(args, "tests", None) else pipeline.TESTS
    cfg = pipeline.RunConfig(input_path=args.input, rewrites=rewrites, tests=tests, **fields)
    return cfg.apply_env()


def cmd_canon(args) -> int:
    parsed = ghp_uri.parse(args.uri)
    if isinstance(parsed, ghp_uri.GhpUri):
        out = {"platform": parsed.platform.value, "canonical": parsed.canonical_repo_uri,
               "repo_path": list(parsed.repo_path), "is_deep": parsed.is_deep, "original": parsed.original_uri}
    else:
        out = {"result": type(parsed).__name__, "reason": parsed.reason}
    print(json.dumps(out, indent=2))
    return 0


def cmd_ingest(args) -> int:
    cfg = _config(args)
    ing = pipeline.ingest(cfg)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    write_rejects(ing.load.rejects, cfg.output_dir / "rejects.csv", "delimited")
    with (cfg.output_dir / "groups.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for g in ing.grouping.groups:
            fh.write(json.dumps({
                "canonical_uri": g.canonical_uri, "platform": g.platform.value,
                "earliest_publication_date": g.earliest_publication_date.isoformat(),
                "citations": len(g.citations),
                "originals": {u: d.isoformat() for u, d in g.originals.items()},
            }, sort_keys=True) + "\n")
    s = ing.stats
    print(f"{s.rows} rows: {s.records} records, {s.rejects} rejects, {len(ing.grouping.groups)} repositories, "
          f"{s.skipped_non_ghp} non-GHP, {s.not_repository} non-repository, {s.duplicates} duplicates")
    return 0


def cmd_audit(args) -> int:
    cfg = _config(args)
    groups, requests = pipeline.run_audit(cfg)
    print(f"audited {groups} repositories ({','.join(cfg.tests)}): {requests} requests")
    return 0


def _cached_repos(cfg):
    ing = pipeline.ingest(cfg)
    repos, _ = pipeline.collect(cfg, ing, ObservationCache(cfg.cache_dir), network=False)
    return ing, repos


def cmd_classify(args) -> int:
    cfg = _config(args)
    _, repos = _cached_repos(cfg)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.output_dir / "classifications.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["canonical_uri", "platform", "active", "in_swh", "in_web_archives", "status", "quadrant"])
        for r in repos:
            w.writerow([r.canonical_uri, r.platform.value, r.active, r.in_swh.value, r.in_web_archives.value,
                        r.classification.status.value, r.classification.coverage_quadrant.value])
    indeterminate = sum(r.classification.status.value == "Indeterminate" for r in repos)
    print(f"classified {len(repos)} repositories -> {path}")
    return pipeline.EXIT_UNKNOWNS if indeterminate else pipeline.EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _config(args)
    ing, repos = _cached_repos(cfg)
    temporal: TemporalResults = analyze_temporal(repos, cfg.swh_cutoff)
    report = build_report(repos, ing.stats, temporal)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    for name, text in plot_tables(report, temporal).items():
        if name.endswith("_monthly.csv") or name.startswith(("capture_deltas", "stale_gaps")):
            (cfg.output_dir / name).write_text(text, encoding="utf-8", newline="\n")
    for t in report.temporal:
        print(f"{t.kind}/{t.granularity}: {t.deltas} deltas, mean {t.mean_delta_days} d, "
              f"median {t.median_delta_days} d; {t.stale} stale, mean gap {t.mean_stale_days} d")
    return 0


def cmd_report(args) -> int:
    cfg = _config(args)
    result = pipeline.run_pipeline(cfg, network=False)
    sys.stdout.write((cfg.output_dir / "summary.txt").read_text(encoding="utf-8"))
    return result.exit_code


def cmd_run(args) -> int:
    cfg = _config(args)
    result = pipeline.run_pipeline(cfg, network=True)
    sys.stdout.write((cfg.output_dir / "summary.txt").read_text(encoding="utf-8"))
    return result.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghp-audit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canon", help="show how one URI parses and canonicalizes")
    p.add_argument("uri")
    p.set_defaults(func=cmd_canon)

    for name, func, help_ in (
        ("ingest", cmd_ingest, "load and group the corpus"),
        ("audit", cmd_audit, "run the three tests, filling the cache"),
        ("classify", cmd_classify, "classify repositories from cached observations"),
        ("analyze", cmd_analyze, "publication-to-capture timing from cached observations"),
        ("report", cmd_report, "build reports from cached observations"),
        ("run", cmd_run, "all stages"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "audit":
            p.add_argument("--tests", default=",".join(pipeline.TESTS),
                           help="comma-separated subset of liveness,swh,web")
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except pipeline.IncompleteAudit as exc:
        print(f"error: {exc}; run `ghp-audit audit` first", file=sys.stderr)
    except (pipeline.ConfigError, CorpusError, ReportError, OfflineError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return pipeline.EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
