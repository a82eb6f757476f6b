"""Command line front end.

Every option can come from a JSON config file (--config); explicit flags
win over the file, the file wins over built-in defaults. Exit codes: 0 ok,
1 bad input or configuration, 2 internal failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .autoencoder import TrainConfig
from .errors import ConfigError, InternalError
from .ingest import WindowSpec, write_records_csv
from .pipeline import (
    BARCODE_DIR,
    LOSSES_FILE,
    engine_selftest,
    featurize,
    read_ip_file,
    report,
    score,
    train_models,
    write_ip_file,
)
from .synth import ScenarioConfig, generate, scenario_ips, write_labels_csv

DEFAULTS = {
    "window_len": 600,
    "stride": 300,
    "subwindow_len": 3600,
    "sub_stride": 0,
    "split_mode": "clip",
    "edge_cap": 64,
    "workers": 1,
    "format": None,
    "seed": 0,
    "learning_rate": 1e-3,
    "epochs": 500,
    "batch_size": 32,
    "optimizer": "adam",
    "percentiles": "25,50,75",
    "duration": 21600.0,
    "benign": 15,
    "malicious": 3,
    "holdout": 3,
    "benign_period": "120:300",
    "attack_window": None,
    "attack_rate": 0.5,
    "attack_exec_pool": 8,
    "allow_overlap": False,
}


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    unknown = set(config) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return config


class _Options:
    """Flag > config file > default, looked up per key."""

    def __init__(self, args):
        self._args = args
        self._config = _load_config(getattr(args, "config", None))

    def __getattr__(self, key):
        value = getattr(self._args, key, None)
        if value is None or (key == "allow_overlap" and value is False):
            if key in self._config:
                return self._config[key]
            return DEFAULTS[key]
        return value


def _parse_span(text, what):
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"{what} must look like LO:HI, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"{what} must be numeric: {text!r}") from exc
    return lo, hi


def _parse_percentiles(text):
    try:
        values = tuple(float(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"bad percentile list: {text!r}") from exc
    if not values:
        raise ConfigError("empty percentile list")
    return values


def _window_spec(opt) -> WindowSpec:
    return WindowSpec(
        window_len=int(opt.window_len),
        stride=int(opt.stride),
        subwindow_len=int(opt.subwindow_len),
    )


def _train_config(opt) -> TrainConfig:
    return TrainConfig(
        seed=int(opt.seed),
        learning_rate=float(opt.learning_rate),
        epochs=int(opt.epochs),
        batch_size=int(opt.batch_size),
        optimizer=opt.optimizer,
    )


def _scenario(opt) -> ScenarioConfig:
    benign, malicious = scenario_ips(int(opt.benign), int(opt.malicious))
    windows = opt.attack_window
    if windows is None:
        windows = ScenarioConfig.__dataclass_fields__["attack_windows"].default
    else:
        if isinstance(windows, str):
            windows = [windows]
        windows = tuple(_parse_span(w, "attack window") for w in windows)
    return ScenarioConfig(
        seed=int(opt.seed),
        duration=float(opt.duration),
        benign_ips=benign,
        malicious_ips=malicious,
        benign_period=_parse_span(opt.benign_period, "benign period"),
        attack_windows=windows,
        attack_exec_pool=int(opt.attack_exec_pool),
        attack_rate=float(opt.attack_rate),
    )


def _write_scenario(opt, out_dir):
    cfg = _scenario(opt)
    records, labels = generate(cfg)
    flows_path = os.path.join(out_dir, "flows.csv")
    labels_path = os.path.join(out_dir, "labels.csv")
    write_records_csv(records, flows_path)
    write_labels_csv(labels, labels_path)
    return cfg, flows_path, labels_path


def cmd_synth(args):
    opt = _Options(args)
    os.makedirs(args.out, exist_ok=True)
    _, flows_path, labels_path = _write_scenario(opt, args.out)
    print(f"wrote {flows_path}")
    print(f"wrote {labels_path}")
    return 0


def cmd_featurize(args):
    opt = _Options(args)
    meta = featurize(
        args.flows, args.out, _window_spec(opt), fmt=opt.format,
        mode=opt.split_mode, sub_stride=int(opt.sub_stride),
        edge_cap=int(opt.edge_cap), workers=int(opt.workers),
    )
    print(f"featurized {meta['n_records']} records from "
          f"{meta['n_sources']} sources into {args.out}")
    return 0


def cmd_train(args):
    opt = _Options(args)
    summary = train_models(args.features, args.out,
                           read_ip_file(args.train_ips), _train_config(opt))
    print(f"trained on {len(summary['train_ips'])} sources into {args.out}")
    return 0


def cmd_score(args):
    opt = _Options(args)
    rows = score(args.features, args.models, args.out,
                 allow_overlap=bool(opt.allow_overlap))
    print(f"scored {len(rows)} sub-windows into {args.out}")
    return 0


def cmd_report(args):
    opt = _Options(args)
    result = report(args.losses, args.out, labels_path=args.labels,
                    barcodes_dir=args.barcodes,
                    percentiles=_parse_percentiles(opt.percentiles))
    print(f"wrote {result['table']} and {len(result['figures'])} figures")
    return 0


def cmd_run(args):
    opt = _Options(args)
    out = args.out
    os.makedirs(out, exist_ok=True)
    if args.synth:
        scenario, flows_path, labels_path = _write_scenario(opt, out)
        holdout = int(opt.holdout)
        train_ips = list(scenario.benign_ips[:len(scenario.benign_ips) - holdout])
        if not train_ips:
            raise ConfigError("holdout leaves no benign sources for training")
        write_ip_file(train_ips, os.path.join(out, "train_ips.txt"))
    else:
        if not args.flows or not args.train_ips:
            raise ConfigError("run needs either --synth or --flows with --train-ips")
        flows_path = args.flows
        labels_path = args.labels
        train_ips = read_ip_file(args.train_ips)

    features_dir = os.path.join(out, "features")
    meta = featurize(
        flows_path, features_dir, _window_spec(opt), fmt=opt.format,
        mode=opt.split_mode, sub_stride=int(opt.sub_stride),
        edge_cap=int(opt.edge_cap), workers=int(opt.workers),
    )
    models_dir = os.path.join(out, "models")
    train_models(features_dir, models_dir, train_ips, _train_config(opt))
    losses_path = os.path.join(out, LOSSES_FILE)
    rows = score(features_dir, models_dir, losses_path,
                 allow_overlap=bool(opt.allow_overlap))
    result = report(losses_path, os.path.join(out, "report"),
                    labels_path=labels_path,
                    barcodes_dir=os.path.join(features_dir, BARCODE_DIR),
                    percentiles=_parse_percentiles(opt.percentiles))
    print(f"featurized {meta['n_sources']} sources, "
          f"scored {len(rows)} sub-windows")
    print(f"report: {result['table']}")
    return 0


def cmd_selftest(args):
    for line in engine_selftest():
        print(line)
    print("engine self-check passed")
    return 0


def _add_config_flag(p):
    p.add_argument("--config", help="JSON file with option defaults")


def _add_window_flags(p):
    p.add_argument("--window-len", type=int, dest="window_len")
    p.add_argument("--stride", type=int)
    p.add_argument("--subwindow-len", type=int, dest="subwindow_len")
    p.add_argument("--sub-stride", type=int, dest="sub_stride")
    p.add_argument("--split-mode", choices=("clip", "recompute"), dest="split_mode")
    p.add_argument("--edge-cap", type=int, dest="edge_cap")
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=("csv", "jsonl"))


def _add_train_flags(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--optimizer", choices=("adam", "sgd"))


def _add_synth_flags(p):
    p.add_argument("--benign", type=int)
    p.add_argument("--malicious", type=int)
    p.add_argument("--duration", type=float)
    p.add_argument("--benign-period", dest="benign_period")
    p.add_argument("--attack-window", action="append", dest="attack_window",
                   metavar="START:END")
    p.add_argument("--attack-rate", type=float, dest="attack_rate")
    p.add_argument("--attack-exec-pool", type=int, dest="attack_exec_pool")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zzhd",
        description="Topological anomaly detection for network flow logs",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("synth", help="generate a labeled synthetic flow log")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    _add_synth_flags(p)
    _add_config_flag(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("featurize", help="flow log to feature tables and barcodes")
    p.add_argument("--flows", required=True)
    p.add_argument("--out", required=True)
    _add_window_flags(p)
    _add_config_flag(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="fit the two autoencoders")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--train-ips", required=True, dest="train_ips")
    _add_train_flags(p)
    _add_config_flag(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="reconstruction error per sub-window")
    p.add_argument("--features", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--allow-overlap", action="store_true", dest="allow_overlap")
    _add_config_flag(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="percentile table and figures")
    p.add_argument("--losses", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--labels")
    p.add_argument("--barcodes")
    p.add_argument("--percentiles")
    _add_config_flag(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run", help="featurize, train, score, and report")
    p.add_argument("--out", required=True)
    p.add_argument("--synth", action="store_true")
    p.add_argument("--flows")
    p.add_argument("--labels")
    p.add_argument("--train-ips", dest="train_ips")
    p.add_argument("--holdout", type=int)
    p.add_argument("--allow-overlap", action="store_true", dest="allow_overlap")
    p.add_argument("--percentiles")
    _add_synth_flags(p)
    _add_window_flags(p)
    _add_train_flags(p)
    _add_config_flag(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("selftest", help="check the persistence engine")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
