"""Deterministic synthetic flow-log scenarios with labeled attack windows.

Benign hosts poll a fixed trio of service ports whose executable patterns
share at most one link, so their connectivity graph never contains a cycle.
Compromised hosts additionally emit a ring of scanner ports whose two-member
patterns close a cycle, which is what the topological features react to.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field

from .errors import ConfigError
from .ingest import FlowRecord, format_timestamp, parse_timestamp

BASE_EPOCH = 1569196800  # 2019-09-23T00:00:00Z

BENIGN_PORT_PATTERNS = {
    5355: ("svchost.exe",),
    138: ("System",),
    443: ("svchost.exe", "System"),
}

ATTACK_RING_PORT_BASE = 40000
ATTACK_EXTRA_PORT_BASE = 41000
ATTACK_RING_SIZE_CAP = 4
MIN_BENIGN_GAP = 60.0


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    duration: float = 21600.0
    benign_ips: tuple = ()
    malicious_ips: tuple = ()
    benign_period: tuple = (120.0, 300.0)
    attack_windows: tuple = ((3600.0, 5400.0), (11520.0, 13680.0))
    attack_exec_pool: int = 8
    attack_rate: float = 0.5

    def __post_init__(self):
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if not self.benign_ips and not self.malicious_ips:
            raise ConfigError("scenario needs at least one source IP")
        overlap = set(self.benign_ips) & set(self.malicious_ips)
        if overlap:
            raise ConfigError(f"IPs listed as both benign and malicious: {sorted(overlap)}")
        lo, hi = self.benign_period
        if lo < MIN_BENIGN_GAP or hi < lo:
            raise ConfigError(
                f"benign_period must satisfy {MIN_BENIGN_GAP} <= lo <= hi"
            )
        for start, end in self.attack_windows:
            if not (0 <= start < end <= self.duration):
                raise ConfigError(f"attack window [{start}, {end}] outside the scenario")
        if self.attack_exec_pool < 3:
            raise ConfigError("attack_exec_pool must be at least 3")
        if self.attack_rate <= 0:
            raise ConfigError("attack_rate must be positive")


def attack_port_patterns(pool_size: int) -> dict:
    """Ring of two-member patterns over the first few pool executables,
    then singleton ports for the rest."""
    execs = [f"implant{i:02d}.exe" for i in range(pool_size)]
    ring = min(ATTACK_RING_SIZE_CAP, pool_size)
    patterns = {}
    for j in range(ring):
        patterns[ATTACK_RING_PORT_BASE + j] = (execs[j], execs[(j + 1) % ring])
    for i in range(ring, pool_size):
        patterns[ATTACK_EXTRA_PORT_BASE + i] = (execs[i],)
    return patterns


def _benign_stream(ip: str, cfg: ScenarioConfig) -> list:
    rng = random.Random(f"{cfg.seed}:{ip}")
    lo, hi = cfg.benign_period
    ports = sorted(BENIGN_PORT_PATTERNS)
    records = []
    clock = rng.uniform(lo, hi)
    while clock < cfg.duration:
        port = rng.choice(ports)
        ts = BASE_EPOCH + int(clock)
        for exe in BENIGN_PORT_PATTERNS[port]:
            records.append(FlowRecord(ts, ip, port, exe))
        clock += rng.uniform(lo, hi)
    return records


def _attack_stream(ip: str, cfg: ScenarioConfig) -> list:
    rng = random.Random(f"{cfg.seed}:{ip}:attack")
    patterns = attack_port_patterns(cfg.attack_exec_pool)
    ports = sorted(patterns)
    records = []
    for start, end in cfg.attack_windows:
        clock = start + rng.expovariate(cfg.attack_rate)
        tick = 0
        while clock < end:
            port = ports[tick % len(ports)]
            ts = BASE_EPOCH + int(clock)
            for exe in patterns[port]:
                records.append(FlowRecord(ts, ip, port, exe))
            tick += 1
            clock += rng.expovariate(cfg.attack_rate)
    return records


def generate(cfg: ScenarioConfig):
    """All records plus (src_ip, start_iso, end_iso, label) attack labels."""
    records = []
    for ip in sorted(set(cfg.benign_ips) | set(cfg.malicious_ips)):
        records.extend(_benign_stream(ip, cfg))
        if ip in cfg.malicious_ips:
            records.extend(_attack_stream(ip, cfg))
    records.sort(key=lambda r: (r.timestamp, r.src_ip, r.dst_port, r.image_path))
    labels = []
    for ip in sorted(cfg.malicious_ips):
        for start, end in cfg.attack_windows:
            labels.append((
                ip,
                format_timestamp(BASE_EPOCH + int(start)),
                format_timestamp(BASE_EPOCH + int(end)),
                "attack",
            ))
    return records, labels


def write_labels_csv(labels: list, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src_ip", "start_iso", "end_iso", "label"])
        writer.writerows(labels)


def read_labels_csv(path: str) -> list:
    """(src_ip, start_epoch, end_epoch, label) rows."""
    out = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["src_ip", "start_iso", "end_iso", "label"]:
                raise ConfigError(f"unrecognized label file header in {path}")
            for row in reader:
                out.append((row[0], parse_timestamp(row[1]), parse_timestamp(row[2]), row[3]))
    except OSError as exc:
        raise ConfigError(f"cannot read labels from {path}: {exc}") from exc
    return out


def scenario_ips(n_benign: int, n_malicious: int):
    """Stable address blocks: benign in 10.0.0.0/24, malicious in 10.0.9.0/24."""
    if n_benign < 0 or n_malicious < 0 or n_benign > 250 or n_malicious > 250:
        raise ConfigError("IP counts must be between 0 and 250")
    benign = tuple(f"10.0.0.{i + 1}" for i in range(n_benign))
    malicious = tuple(f"10.0.9.{i + 1}" for i in range(n_malicious))
    return benign, malicious
