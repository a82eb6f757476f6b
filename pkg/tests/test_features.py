import math
import random

import pytest

from zzhd.errors import ConfigError
from zzhd.features import (
    ACC_HEADER,
    STATS_HEADER,
    SubwindowBarcode,
    acc_features,
    acc_vector,
    clip_intervals,
    read_feature_csv,
    split_subwindows,
    stats_vector,
    subwindow_starts,
    write_feature_csv,
)
from zzhd.hypergraph import SnapshotStats
from zzhd.ingest import WindowSpec
from zzhd.zigzag import INF, Barcode, Interval, zigzag_barcode

from helpers import complex_of, letters_interner


def test_acc_single_interval():
    # one bar [1,2] on [0,3]: b(d-b)=1, (3-2)(1)=1, 1*1=1, 1*1=1
    assert acc_features([(1.0, 2.0)], 3.0) == (1.0, 1.0, 1.0, 1.0)


def test_acc_two_intervals():
    # [0,2]: 0, 3, 0, 16   [1,3]: 2, 0, 16, 0  per coordinate:
    # f0 = 0*2 + 1*2 = 2? recompute: b(d-b) = 0*2=0 and 1*2=2 -> 2
    # f1 = (3-2)*2 + (3-3)*2 = 2
    # f2 = 0 + 1*16 = 16
    # f3 = 1*16 + 0 = 16
    assert acc_features([(0.0, 2.0), (1.0, 3.0)], 3.0) == (2.0, 2.0, 16.0, 16.0)


def test_acc_empty():
    assert acc_features([], 5.0) == (0.0, 0.0, 0.0, 0.0)


def test_acc_additivity():
    rng = random.Random(7)
    for _ in range(30):
        d_max = 12.0
        bars = []
        for _ in range(rng.randint(0, 12)):
            b = rng.uniform(0, d_max - 0.5)
            d = rng.uniform(b, d_max)
            bars.append((b, d))
        cut = rng.randint(0, len(bars))
        whole = acc_features(bars, d_max)
        left = acc_features(bars[:cut], d_max)
        right = acc_features(bars[cut:], d_max)
        for w, l, r in zip(whole, left, right):
            assert abs(w - (l + r)) <= 1e-12 * max(1.0, abs(w))


def test_acc_rejects_out_of_range():
    with pytest.raises(Exception):
        acc_features([(1.0, 14.0)], 12.0)
    with pytest.raises(Exception):
        acc_features([(-1.0, 2.0)], 12.0)


def test_clip_basic():
    out = clip_intervals([(10.0, 14.5)], 12.0, 24.0)
    assert out == [(12.0, 14.5)]


def test_clip_drops_outside():
    assert clip_intervals([(2.0, 5.0)], 12.0, 24.0) == []


def test_clip_infinite():
    assert clip_intervals([(0.0, INF)], 12.0, 24.0) == [(12.0, 24.0)]


def test_clip_touching_dropped():
    # [5,12] meets the window only at the single point 12
    assert clip_intervals([(5.0, 12.0)], 12.0, 24.0) == []
    assert clip_intervals([(24.0, 30.0)], 12.0, 24.0) == []


def test_clip_idempotent():
    rng = random.Random(3)
    for _ in range(40):
        bars = []
        for _ in range(rng.randint(0, 10)):
            b = rng.uniform(0, 30)
            d = rng.choice([rng.uniform(b, 36), INF])
            bars.append((b, d))
        once = clip_intervals(bars, 12.0, 24.0)
        twice = clip_intervals(once, 12.0, 24.0)
        assert once == twice


def default_spec():
    return WindowSpec(window_len=600, stride=300, subwindow_len=3600)


def test_subwindow_starts_geometry():
    spec = default_spec()
    # 12 snapshots per sub-window; need t0 + 12 <= n - 1
    assert subwindow_starts(13, spec) == [0]
    assert subwindow_starts(12, spec) == []
    assert subwindow_starts(25, spec) == [0, 12]
    assert subwindow_starts(36, spec) == [0, 12]
    assert subwindow_starts(37, spec) == [0, 12, 24]


def test_subwindow_starts_custom_stride():
    spec = default_spec()
    assert subwindow_starts(25, spec, sub_stride=1800) == [0, 6, 12]
    with pytest.raises(ConfigError):
        subwindow_starts(25, spec, sub_stride=500)


def barcode_fixture():
    return [
        Barcode(dim=0, n_snapshots=25, intervals=[Interval(0, 0.0, INF)]),
        Barcode(dim=1, n_snapshots=25,
                intervals=[Interval(1, 1.0, 2.0), Interval(1, 11.5, 14.0)]),
    ]


def test_split_subwindows_clip():
    subs = split_subwindows(barcode_fixture(), "10.0.0.1", default_spec())
    assert [s.sub_start_index for s in subs] == [0, 12]
    first, second = subs
    assert first.intervals[0] == [(0.0, 12.0)]
    assert first.intervals[1] == [(1.0, 2.0), (11.5, 12.0)]
    assert second.intervals[0] == [(12.0, 24.0)]
    assert second.intervals[1] == [(12.0, 14.0)]


def test_acc_vector_rezeroes():
    subs = split_subwindows(barcode_fixture(), "10.0.0.1", default_spec())
    vec = acc_vector(subs[1])
    # dim 0 bar re-zeroed to [0,12] on d_max 12: f0=0, f1=0, f2=0, f3 = 144*? ->
    # (12-12)=0 so f1 term 0; f3 = (12-12)^2 * 12^4 = 0? No: (d_max-d)=0 -> 0.
    assert vec[0] == 0.0 and vec[1] == 0.0 and vec[2] == 0.0 and vec[3] == 0.0
    # dim 1 bar [12,14] -> [0,2]: f0 = 0, f1 = (12-2)*2 = 20, f2 = 0, f3 = 100*16=1600
    assert vec[4:] == [0.0, 20.0, 0.0, 1600.0]


def test_acc_vector_needs_both_dims():
    sub = SubwindowBarcode("ip", 0, 12, {0: []})
    with pytest.raises(ConfigError):
        acc_vector(sub)


def test_split_recompute_matches_clip_on_stable_sequences():
    # A sequence whose homology never straddles the boundary: recomputing
    # per sub-window must agree with clipping the global barcode.
    interner = letters_interner()
    tri = complex_of(interner, "abc")
    seq = [tri] * 13
    spec = default_spec()
    barcodes = zigzag_barcode(seq, p_max=1)
    clip = split_subwindows(barcodes, "ip", spec, mode="clip")
    re = split_subwindows(barcodes, "ip", spec, mode="recompute", sequence=seq)
    assert [s.intervals for s in clip] == [s.intervals for s in re]


def test_split_recompute_requires_sequence():
    with pytest.raises(ConfigError):
        split_subwindows(barcode_fixture(), "ip", default_spec(), mode="recompute")
    with pytest.raises(ConfigError):
        split_subwindows(barcode_fixture(), "ip", default_spec(), mode="nope")


def test_stats_vector_shape():
    spec = default_spec()
    stats = [SnapshotStats(1, 3, 1, 1)] * 12
    vec = stats_vector(stats, spec)
    assert len(vec) == 48
    assert vec[:4] == [1.0, 3.0, 1.0, 1.0]
    with pytest.raises(Exception):
        stats_vector(stats[:11], spec)


def test_feature_csv_roundtrip(tmp_path):
    rows = [
        ("10.0.0.1", "2019-09-23T00:00:00Z", (1.0, 2.5, 0.0, 1e-9, 3.0, 0.0, 0.125, 7.0)),
        ("10.0.0.2", "2019-09-23T01:00:00Z", (0.0,) * 8),
    ]
    path = tmp_path / "acc.csv"
    write_feature_csv(rows, str(path), kind="acc")
    header, back = read_feature_csv(str(path))
    assert header == ACC_HEADER
    assert back == rows


def test_feature_csv_stats_kind(tmp_path):
    rows = [("ip", "2019-09-23T00:00:00Z", tuple(float(i) for i in range(48)))]
    path = tmp_path / "stats.csv"
    write_feature_csv(rows, str(path), kind="stats")
    header, back = read_feature_csv(str(path))
    assert header == STATS_HEADER
    assert back == rows
    with pytest.raises(ConfigError):
        write_feature_csv(rows, str(path), kind="other")


def test_acc_nonnegative_on_random_barcodes():
    rng = random.Random(11)
    for _ in range(40):
        d_max = 12.0
        bars = []
        for _ in range(rng.randint(0, 8)):
            b = rng.uniform(0, d_max)
            d = rng.uniform(b, d_max)
            bars.append((b, d))
        for value in acc_features(bars, d_max):
            assert value >= 0.0
