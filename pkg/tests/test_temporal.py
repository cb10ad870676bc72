import random
import statistics
from datetime import date, datetime, timedelta, timezone

from hypothesis import given, strategies as st

from ghp_audit.temporal import (
    SWH_CUTOFF, ArchiveKind, CaptureDelta, capture_deltas, day_summary, monthly_aggregate, recaptured,
    stale_gaps,
)


def ts(day: str, hour: int = 0) -> datetime:
    return datetime.fromisoformat(day).replace(hour=hour, tzinfo=timezone.utc)


def test_year_delta():
    [d] = capture_deltas([("u", date(2017, 1, 1))], {"u": [ts("2018-01-01")]}, "swh")
    assert (d.delta_days, d.delta_months, d.archive_kind) == (365, 12, ArchiveKind.SWH)


def test_same_day_is_zero_regardless_of_time():
    [d] = capture_deltas([("u", date(2016, 7, 15))], {"u": [ts("2016-07-15", 23)]}, "swh", SWH_CUTOFF)
    assert d.delta_days == 0 and d.delta_months == 0


def test_captured_before_publication_excluded():
    hist = {"u": [ts("2016-05-01"), ts("2018-01-01")]}
    assert capture_deltas([("u", date(2017, 3, 1))], hist, "swh") == []


def test_never_captured_emits_nothing():
    assert capture_deltas([("u", date(2017, 3, 1))], {"u": []}, "web") == []
    assert stale_gaps([("u", date(2017, 3, 1))], {}, "web") == []


def test_cutoff_applies_to_swh_only():
    groups = [("old", date(2016, 6, 30)), ("new", date(2016, 7, 1))]
    hist = {"old": [ts("2017-01-01")], "new": [ts("2017-01-01")]}
    assert [d.canonical_uri for d in capture_deltas(groups, hist, "swh", SWH_CUTOFF)] == ["new"]
    assert [d.canonical_uri for d in capture_deltas(groups, hist, "web")] == ["old", "new"]


def test_stale_gap_examples():
    [g] = stale_gaps([("u", date(2016, 9, 1))], {"u": [ts("2016-01-01")]}, "web")
    assert g.gap_days == 244
    assert g.last_capture_before_pub == ts("2016-01-01")
    assert stale_gaps([("u", date(2016, 9, 1))], {"u": [ts("2016-01-01"), ts("2017-01-01")]}, "web") == []
    assert recaptured([("u", date(2016, 9, 1))], {"u": [ts("2016-01-01"), ts("2017-01-01")]}) == ["u"]


def delta(month: str, months: int) -> CaptureDelta:
    pub = date.fromisoformat(month + "-01")
    return CaptureDelta("u" + month + str(months), pub, ts("2030-01-01"), 0, months, ArchiveKind.SWH)


def test_monthly_singleton_and_pair():
    [row] = monthly_aggregate([delta("2017-03", 14)])
    assert (row.min, row.median, row.mean, row.max) == (14, 14, 14, 14)
    [row] = monthly_aggregate([delta("2018-01", 2), delta("2018-01", 10)])
    assert (row.mean, row.median, row.max, row.count) == (6, 6, 10, 2)


def test_monthly_twenty_deltas_four_months():
    rnd = random.Random(7)
    ds = [delta(m, rnd.randint(0, 60)) for m in ("2017-01", "2017-02", "2018-06", "2019-12") for _ in range(5)]
    rows = monthly_aggregate(ds)
    assert [r.month for r in rows] == ["2017-01", "2017-02", "2018-06", "2019-12"]
    for r in rows:
        vals = sorted(d.delta_months for d in ds if d.publication_date.strftime("%Y-%m") == r.month)
        assert (r.min, r.max, r.count) == (vals[0], vals[-1], 5)
        assert r.median == vals[2]
        assert r.mean == sum(vals) / 5


def test_day_summary():
    assert day_summary([]).count == 0
    s = day_summary([1, 2, 3, 10])
    assert (s.mean_days, s.median_days) == (4, 2.5)


# -- brute-force oracle over a synthetic corpus ----------------------------------

def count_days(a: date, b: date) -> int:
    n = 0
    while a < b:
        a += timedelta(days=1)
        n += 1
    return n


def count_months(a: date, b: date) -> int:
    n = 0
    y, m = a.year, a.month
    while (y, m) < (b.year, b.month):
        m += 1
        if m == 13:
            y, m = y + 1, 1
        n += 1
    return n


def synthetic(seed: int, n: int = 30):
    rnd = random.Random(seed)
    groups, hist = [], {}
    base = date(2012, 1, 1)
    for i in range(n):
        uri = f"https://github.com/o/r{i}"
        pub = base + timedelta(days=rnd.randint(0, 3650))
        caps = sorted({ts((base + timedelta(days=rnd.randint(0, 4300))).isoformat(), rnd.randint(0, 23))
                       for _ in range(rnd.randint(0, 4))})
        groups.append((uri, pub))
        hist[uri] = caps
    return groups, hist


def oracle(groups, hist, cutoff):
    deltas, gaps, rec = {}, {}, set()
    for uri, pub in groups:
        if cutoff and pub < cutoff:
            continue
        days = [c.date() for c in hist[uri]]
        if not days:
            continue
        before = [d for d in days if d < pub]
        after = [d for d in days if d >= pub]
        if not before:
            deltas[uri] = (count_days(pub, min(after)), count_months(pub, min(after)))
        elif not after:
            gaps[uri] = count_days(max(before), pub)
        else:
            rec.add(uri)
    return deltas, gaps, rec


def test_brute_force_oracle():
    for seed in range(5):
        groups, hist = synthetic(seed)
        for cutoff in (None, SWH_CUTOFF):
            deltas, gaps, rec = oracle(groups, hist, cutoff)
            got_d = {d.canonical_uri: (d.delta_days, d.delta_months) for d in
                     capture_deltas(groups, hist, "swh", cutoff)}
            got_g = {g.canonical_uri: g.gap_days for g in stale_gaps(groups, hist, "swh", cutoff)}
            assert got_d == deltas
            assert got_g == gaps
            assert set(recaptured(groups, hist, cutoff)) == rec


@given(st.integers(0, 10_000))
def test_partition_of_captured_uris(seed):
    groups, hist = synthetic(seed, 12)
    d = {x.canonical_uri for x in capture_deltas(groups, hist, "web")}
    g = {x.canonical_uri for x in stale_gaps(groups, hist, "web")}
    r = set(recaptured(groups, hist))
    captured = {u for u, _ in groups if hist[u]}
    assert d | g | r == captured
    assert len(d) + len(g) + len(r) == len(captured)
    for x in capture_deltas(groups, hist, "web"):
        assert x.delta_months >= 0 and x.delta_days >= 0
        p, c = x.publication_date, x.first_capture.date()
        assert x.delta_months == (c.year * 12 + c.month) - (p.year * 12 + p.month)


@given(st.lists(st.integers(0, 100), min_size=1, max_size=12))
def test_even_median_is_mean_of_centre(vals):
    [row] = monthly_aggregate([delta("2020-02", v) for v in vals])
    s = sorted(vals)
    assert row.median == statistics.median(s)
    if len(s) % 2 == 0:
        assert row.median == (s[len(s) // 2 - 1] + s[len(s) // 2]) / 2
