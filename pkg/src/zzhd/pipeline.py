"""Pipeline stages: featurize, train, score, report, plus the engine
self-check. Each stage reads and writes plain files so runs can be resumed
or inspected midway, and every output is deterministic for a fixed input
(workers only change scheduling, not results)."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .autoencoder import (
    TrainConfig,
    apply_scaler,
    fit_scaler,
    init_model,
    load_model,
    save_model,
    score_vectors,
    train,
    write_loss_history,
)
from .complexes import VertexInterner, associated_asc
from .errors import ConfigError, InternalError
from .features import (
    acc_vector,
    read_feature_csv,
    split_subwindows,
    stats_vector,
    write_feature_csv,
)
from .hypergraph import build_snapshot, snapshot_stats
from .ingest import (
    WindowSpec,
    WindowedRecords,
    format_timestamp,
    read_flow_file,
    window_records,
    write_reject_report,
)
from .zigzag import INF, write_barcode_csv, zigzag_barcode

MAX_DIM = 2
P_MAX = 1

FEATURES_ACC = "features_acc.csv"
FEATURES_STATS = "features_stats.csv"
LOSSES_FILE = "losses.csv"
META_FILE = "run_meta.json"
MODELS_META = "models_meta.json"
BARCODE_DIR = "barcodes"


def safe_ip(ip: str) -> str:
    return ip.replace(".", "_").replace(":", "_")


def resolve_workers(requested: int) -> int:
    """ZZHD_WORKERS overrides whatever the config asked for."""
    env = os.environ.get("ZZHD_WORKERS")
    if env is not None:
        try:
            requested = int(env)
        except ValueError as exc:
            raise ConfigError(f"ZZHD_WORKERS must be an integer: {env!r}") from exc
    if requested < 1:
        raise ConfigError("workers must be at least 1")
    return requested


def _featurize_one(task):
    ip, ip_windows, interner, spec, mode, sub_stride, edge_cap = task
    snapshots = [build_snapshot(w, ip) for w in ip_windows]
    stats = [snapshot_stats(s) for s in snapshots]
    seq = [associated_asc(s, MAX_DIM, interner, edge_cap) for s in snapshots]
    barcodes = zigzag_barcode(seq, P_MAX)
    subs = split_subwindows(barcodes, ip, spec, sub_stride=sub_stride,
                            mode=mode, sequence=seq)
    width = spec.snapshots_per_subwindow
    acc_rows, stats_rows = [], []
    for sub in subs:
        t0 = sub.sub_start_index
        acc_rows.append((t0, acc_vector(sub)))
        stats_rows.append((t0, stats_vector(stats[t0:t0 + width], spec)))
    return ip, barcodes, acc_rows, stats_rows


def featurize(flows_path: str, out_dir: str, spec: WindowSpec, fmt=None,
              mode: str = "clip", sub_stride: int = 0, edge_cap: int = 64,
              workers: int = 1) -> dict:
    """Flow log to feature tables, per-source barcodes, and a reject report."""
    os.makedirs(out_dir, exist_ok=True)
    records, rejects = read_flow_file(flows_path, fmt)
    write_reject_report(rejects, os.path.join(out_dir, "rejects.csv"))
    if not records:
        raise ConfigError(f"no usable records in {flows_path}")
    windows = window_records(records, spec)
    origin = windows[0].window_start
    interner = VertexInterner(sorted({r.image_path for r in records}))
    ips = sorted({r.src_ip for r in records})

    per_ip = {ip: [] for ip in ips}
    for w in windows:
        buckets = {ip: [] for ip in ips}
        for r in w.records:
            buckets[r.src_ip].append(r)
        for ip in ips:
            per_ip[ip].append(
                WindowedRecords(w.window_index, w.window_start, tuple(buckets[ip]))
            )
    tasks = [(ip, per_ip[ip], interner, spec, mode, sub_stride, edge_cap)
             for ip in ips]

    workers = min(resolve_workers(workers), len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_featurize_one, tasks))
    else:
        results = [_featurize_one(t) for t in tasks]
    results.sort(key=lambda item: item[0])

    barcode_dir = os.path.join(out_dir, BARCODE_DIR)
    os.makedirs(barcode_dir, exist_ok=True)
    acc_rows, stats_rows = [], []
    for ip, barcodes, ip_acc, ip_stats in results:
        write_barcode_csv(barcodes, os.path.join(barcode_dir, f"{safe_ip(ip)}.csv"))
        for t0, vec in ip_acc:
            acc_rows.append((ip, format_timestamp(origin + t0 * spec.stride), vec))
        for t0, vec in ip_stats:
            stats_rows.append((ip, format_timestamp(origin + t0 * spec.stride), vec))
    write_feature_csv(acc_rows, os.path.join(out_dir, FEATURES_ACC), kind="acc")
    write_feature_csv(stats_rows, os.path.join(out_dir, FEATURES_STATS), kind="stats")

    meta = {
        "version": __version__,
        "input": os.path.basename(str(flows_path)),
        "n_records": len(records),
        "rejects": {k: rejects[k] for k in sorted(rejects)},
        "n_sources": len(ips),
        "n_snapshots": len(windows),
        "origin_epoch": origin,
        "window_len": spec.window_len,
        "stride": spec.stride,
        "subwindow_len": spec.subwindow_len,
        "sub_stride": sub_stride or spec.subwindow_len,
        "split_mode": mode,
        "edge_cap": edge_cap,
        "n_executables": len(interner),
        "n_feature_rows": len(acc_rows),
    }
    with open(os.path.join(out_dir, META_FILE), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return meta


def read_ip_file(path: str) -> list:
    """One IP per line; blanks and # comments skipped."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read IP list {path}: {exc}") from exc
    out = []
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def write_ip_file(ips: list, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ip in sorted(ips):
            fh.write(ip + "\n")


def _load_features(features_dir: str, kind: str):
    name = FEATURES_ACC if kind == "acc" else FEATURES_STATS
    _, rows = read_feature_csv(os.path.join(features_dir, name))
    return rows


def train_models(features_dir: str, models_dir: str, train_ips: list,
                 cfg: TrainConfig) -> dict:
    """Fit one autoencoder per vectorization on the training sources only."""
    os.makedirs(models_dir, exist_ok=True)
    train_set = set(train_ips)
    if not train_set:
        raise ConfigError("empty training IP list")
    summary = {"train_ips": sorted(train_set), "rows": {}}
    for kind in ("acc", "stats"):
        rows = _load_features(features_dir, kind)
        matrix = np.array([v for ip, _, v in rows if ip in train_set], dtype=float)
        if matrix.size == 0:
            raise ConfigError(f"no {kind} feature rows for the training IPs")
        scaler = fit_scaler(matrix)
        model = init_model(matrix.shape[1], seed=cfg.seed)
        trained, history = train(model, apply_scaler(scaler, matrix), cfg)
        save_model(trained, scaler, cfg,
                   os.path.join(models_dir, f"model_{kind}.json"))
        write_loss_history(history,
                           os.path.join(models_dir, f"loss_history_{kind}.csv"))
        summary["rows"][kind] = int(matrix.shape[0])
    with open(os.path.join(models_dir, MODELS_META), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return summary


def _models_meta(models_dir: str) -> dict:
    path = os.path.join(models_dir, MODELS_META)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def score(features_dir: str, models_dir: str, out_path: str,
          allow_overlap: bool = False) -> list:
    """Per-sub-window reconstruction error for every non-training source.

    Returns the written rows: (src_ip, sub_start_iso, mse_acc, mse_stats).
    """
    train_set = set(_models_meta(models_dir).get("train_ips", []))
    joined = {}
    for kind in ("acc", "stats"):
        for ip, iso, values in _load_features(features_dir, kind):
            joined.setdefault((ip, iso), {})[kind] = values
    for key, parts in joined.items():
        if len(parts) != 2:
            raise InternalError(f"feature tables out of step at {key}")

    keys = sorted(joined)
    score_keys = [k for k in keys
                  if allow_overlap or k[0] not in train_set]
    if not score_keys:
        raise ConfigError(
            "nothing to score: every source was used for training "
            "(pass allow_overlap to score them anyway)"
        )
    rows = []
    mses = {}
    for kind in ("acc", "stats"):
        model, scaler, _ = load_model(os.path.join(models_dir, f"model_{kind}.json"))
        matrix = np.array([joined[k][kind] for k in score_keys], dtype=float)
        if matrix.shape[1] != model.input_dim:
            raise ConfigError(f"{kind} feature width does not match the model")
        mses[kind] = score_vectors(model, apply_scaler(scaler, matrix))
    for i, (ip, iso) in enumerate(score_keys):
        rows.append((ip, iso, float(mses["acc"][i]), float(mses["stats"][i])))
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("src_ip,sub_start_iso,mse_acc,mse_stats\n")
        for ip, iso, a, s in rows:
            fh.write(f"{ip},{iso},{a!r},{s!r}\n")
    return rows


def read_losses(path: str) -> list:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read losses from {path}: {exc}") from exc
    if not lines or lines[0] != "src_ip,sub_start_iso,mse_acc,mse_stats":
        raise ConfigError(f"unrecognized loss file header in {path}")
    out = []
    for line in lines[1:]:
        ip, iso, a, s = line.split(",")
        out.append((ip, iso, float(a), float(s)))
    return out


def nearest_rank(values: list, pct: float) -> float:
    """Percentile by the nearest-rank rule on a sorted copy."""
    if not values:
        raise InternalError("percentile of an empty list")
    ordered = sorted(values)
    idx = max(1, math.ceil(pct / 100.0 * len(ordered)))
    return ordered[idx - 1]


def report(losses_path: str, out_dir: str, labels_path=None, barcodes_dir=None,
           percentiles=(25, 50, 75)) -> dict:
    """Percentile table plus per-source loss and barcode figures.

    With labels the table is split into benign and malicious groups; the
    label intervals are shaded into the matching loss plots.
    """
    from .plotting import plot_barcode, plot_loss_series
    from .synth import read_labels_csv
    from .zigzag import read_barcode_csv
    from .ingest import parse_timestamp

    for p in percentiles:
        if not 0 < p <= 100:
            raise ConfigError(f"percentile out of range: {p}")
    os.makedirs(out_dir, exist_ok=True)
    rows = read_losses(losses_path)
    if not rows:
        raise ConfigError(f"no loss rows in {losses_path}")
    labels = read_labels_csv(labels_path) if labels_path else []
    flagged = {r[0] for r in labels}

    groups = {"all": rows}
    if labels:
        groups["benign"] = [r for r in rows if r[0] not in flagged]
        groups["malicious"] = [r for r in rows if r[0] in flagged]
    table_path = os.path.join(out_dir, "report_percentiles.csv")
    with open(table_path, "w", encoding="utf-8", newline="") as fh:
        cols = ",".join(f"p{format_pct(p)}" for p in percentiles)
        fh.write(f"vectorization,group,n,{cols}\n")
        for kind, col in (("acc", 2), ("stats", 3)):
            for group in sorted(groups):
                vals = [r[col] for r in groups[group]]
                if not vals:
                    continue
                cells = ",".join(repr(nearest_rank(vals, p)) for p in percentiles)
                fh.write(f"{kind},{group},{len(vals)},{cells}\n")

    by_ip = {}
    for ip, iso, a, s in rows:
        by_ip.setdefault(ip, []).append((parse_timestamp(iso), a, s))
    origin = min(t for series in by_ip.values() for t, _, _ in series)
    n_snapshots = _barcode_axis_length(barcodes_dir)
    figures = []
    for ip in sorted(by_ip):
        series = sorted(by_ip[ip])
        spans = [(start, end) for lip, start, end, _ in labels if lip == ip]
        loss_path = os.path.join(out_dir, f"loss_{safe_ip(ip)}.svg")
        plot_loss_series(ip, series, spans, origin, loss_path)
        figures.append(loss_path)
        if barcodes_dir:
            bc_path = os.path.join(barcodes_dir, f"{safe_ip(ip)}.csv")
            if os.path.exists(bc_path):
                intervals = read_barcode_csv(bc_path)
                fig_path = os.path.join(out_dir, f"barcode_{safe_ip(ip)}.svg")
                plot_barcode(intervals, n_snapshots, ip, fig_path)
                figures.append(fig_path)
    return {"table": table_path, "figures": figures, "groups": sorted(groups)}


def format_pct(p: float) -> str:
    return str(int(p)) if p == int(p) else str(p)


def _barcode_axis_length(barcodes_dir) -> int:
    """Snapshot count for barcode figures, from the featurize metadata when
    available, else a safe default."""
    if barcodes_dir:
        meta_path = os.path.join(os.path.dirname(os.path.abspath(barcodes_dir)),
                                 META_FILE)
        try:
            with open(meta_path, "r", encoding="utf-8") as fh:
                return int(json.load(fh)["n_snapshots"])
        except (OSError, json.JSONDecodeError, KeyError, ValueError):
            pass
    return 2


def engine_selftest() -> list:
    """Exercise the persistence engine on two sequences with known barcodes.

    Returns one line per check; raises InternalError on any mismatch.
    """
    from .hypergraph import HypergraphSnapshot

    interner = VertexInterner(["a", "b", "c", "d", "e"])

    def complex_of(*groups):
        edges = {i: frozenset(g) for i, g in enumerate(groups)}
        verts = frozenset(v for g in groups for v in g)
        snap = HypergraphSnapshot(0, "selftest", edges, verts)
        return associated_asc(snap, MAX_DIM, interner)

    checks = [
        (
            "growing triangle",
            [complex_of("ab", "bc"),
             complex_of("ab", "ac", "bc"),
             complex_of("abc")],
            {0: [(0.0, INF)], 1: [(1.0, 2.0)]},
        ),
        (
            "rotating triangles",
            [complex_of("ab", "ac", "bc"),
             complex_of("ac", "ad", "cd"),
             complex_of("ab", "ae", "be")],
            {0: [(0.0, INF)], 1: [(0.0, 1.0), (0.5, 2.0), (1.5, INF)]},
        ),
    ]
    lines = []
    for name, seq, expected in checks:
        barcodes = zigzag_barcode(seq, P_MAX)
        got = {bc.dim: [(iv.birth, iv.death) for iv in bc.intervals]
               for bc in barcodes}
        if got != expected:
            raise InternalError(
                f"self-check {name!r} failed: expected {expected}, got {got}"
            )
        lines.append(f"ok: {name}")
    return lines
