"""Fixed-length feature vectors from barcodes and snapshot statistics."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import ConfigError, InternalError
from .ingest import WindowSpec
from .zigzag import INF, zigzag_barcode

ACC_HEADER = ["src_ip", "sub_start_iso"] + [f"f{i}" for i in range(8)]
STATS_HEADER = ["src_ip", "sub_start_iso"] + [f"s{i}" for i in range(48)]


@dataclass(frozen=True)
class SubwindowBarcode:
    """Barcode restricted to one sub-window; endpoints in snapshot indices,
    all inside [sub_start_index, sub_end_index]."""

    src_ip: str
    sub_start_index: int
    sub_end_index: int
    intervals: dict  # dim -> list of (birth, death)


def subwindow_starts(n_snapshots: int, spec: WindowSpec, sub_stride: int = 0) -> list:
    """Start indices of the full-length sub-windows that fit the sequence.

    Sub-windows are aligned to the sequence origin and advance by
    sub_stride seconds (default: subwindow_len, i.e. non-overlapping);
    a trailing partial sub-window is not emitted.
    """
    if sub_stride <= 0:
        sub_stride = spec.subwindow_len
    if sub_stride % spec.stride != 0:
        raise ConfigError("sub-window stride must be a multiple of the window stride")
    length = spec.snapshots_per_subwindow
    step = sub_stride // spec.stride
    starts = []
    t0 = 0
    while t0 + length <= n_snapshots - 1:
        starts.append(t0)
        t0 += step
    return starts


def clip_intervals(intervals: list, t0: float, t1: float) -> list:
    """Intersect intervals with [t0, t1], dropping touch-only overlaps.

    INF right endpoints clip to t1. An interval survives only if its
    intersection with the sub-window is longer than a single point.
    """
    out = []
    for birth, death in intervals:
        lo = max(birth, t0)
        hi = t1 if death == INF else min(death, t1)
        if hi - lo > 0:
            out.append((lo, hi))
    return out


def split_subwindows(
    barcodes: list,
    src_ip: str,
    spec: WindowSpec,
    sub_stride: int = 0,
    mode: str = "clip",
    sequence: list = None,
) -> list:
    """SubwindowBarcodes for every full sub-window of a snapshot sequence.

    mode "clip" (default) intersects the full-run barcode with each
    sub-window; mode "recompute" reruns the zigzag on just the sub-window's
    complexes, which can differ for features interacting with the boundary.
    """
    if mode not in ("clip", "recompute"):
        raise ConfigError(f"unknown sub-barcode mode: {mode!r}")
    if not barcodes:
        raise ConfigError("no barcodes supplied")
    n = barcodes[0].n_snapshots
    length = spec.snapshots_per_subwindow
    out = []
    for t0 in subwindow_starts(n, spec, sub_stride):
        t1 = t0 + length
        if mode == "clip":
            intervals = {
                b.dim: clip_intervals([(iv.birth, iv.death) for iv in b.intervals], t0, t1)
                for b in barcodes
            }
        else:
            if sequence is None:
                raise ConfigError("recompute mode needs the complex sequence")
            local = zigzag_barcode(sequence[t0:t1 + 1], max(b.dim for b in barcodes))
            intervals = {
                b.dim: [
                    (iv.birth + t0, t1 if iv.death == INF else iv.death + t0)
                    for iv in b.intervals
                ]
                for b in local
            }
        out.append(SubwindowBarcode(src_ip, t0, t1, intervals))
    return out


def acc_features(intervals: list, d_max: float) -> tuple:
    """The four polynomial coordinates of a barcode with right horizon d_max.

    For intervals re-zeroed to [0, d_max]:
      sum b(d-b), sum (d_max-d)(d-b), sum b^2 (d-b)^4, sum (d_max-d)^2 (d-b)^4.
    """
    f1 = f2 = f3 = f4 = 0.0
    for birth, death in intervals:
        if birth < -1e-9 or death > d_max + 1e-9 or death < birth:
            raise InternalError(
                f"interval ({birth}, {death}) outside [0, {d_max}]: clipping bug"
            )
        span = death - birth
        tail = d_max - death
        f1 += birth * span
        f2 += tail * span
        f3 += birth * birth * span ** 4
        f4 += tail * tail * span ** 4
    return (f1, f2, f3, f4)


def acc_vector(sub: SubwindowBarcode) -> list:
    """8 floats: ACC of dimension 0 then dimension 1, re-zeroed to the
    sub-window."""
    if 0 not in sub.intervals or 1 not in sub.intervals:
        raise ConfigError("sub-window barcode must carry dimensions 0 and 1")
    d_max = float(sub.sub_end_index - sub.sub_start_index)
    values = []
    for dim in (0, 1):
        rezeroed = [
            (b - sub.sub_start_index, d - sub.sub_start_index)
            for b, d in sub.intervals[dim]
        ]
        values.extend(acc_features(rezeroed, d_max))
    return values


def stats_vector(stats_list: list, spec: WindowSpec) -> list:
    """Snapshot-major flattening of per-snapshot summary statistics:
    (n_edges, n_vertices, n_components, diameter) for each of the
    sub-window's snapshots, 48 values for the defaults."""
    expected = spec.snapshots_per_subwindow
    if len(stats_list) != expected:
        raise InternalError(
            f"expected {expected} snapshots per sub-window, got {len(stats_list)}"
        )
    out = []
    for stats in stats_list:
        out.extend(float(v) for v in stats.as_tuple())
    return out


def write_feature_csv(rows: list, path: str, kind: str) -> None:
    """rows of (src_ip, sub_start_iso, values); kind "acc" or "stats"."""
    header = {"acc": ACC_HEADER, "stats": STATS_HEADER}.get(kind)
    if header is None:
        raise ConfigError(f"unknown feature kind: {kind!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for src_ip, sub_start_iso, values in rows:
            if len(values) != len(header) - 2:
                raise InternalError("feature row width mismatch")
            writer.writerow([src_ip, sub_start_iso] + [repr(float(v)) for v in values])


def read_feature_csv(path: str):
    """Inverse of write_feature_csv: (header, rows) with rows of
    (src_ip, sub_start_iso, values)."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"empty feature file: {path}")
        for row in reader:
            out.append((row[0], row[1], tuple(float(v) for v in row[2:])))
    return header, out
