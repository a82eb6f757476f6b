"""Flow log parsing, filtering, and sliding-window grouping."""

from __future__ import annotations

import csv
import ipaddress
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Optional

from .errors import ConfigError

REQUIRED_FIELDS = ("timestamp", "src_ip", "dst_port", "image_path")
REJECT_REASONS = ("ephemeral_port", "localhost_src", "malformed", "missing_field")

# Lowest port of the dynamic/private range; traffic there is filtered out.
EPHEMERAL_PORT_MIN = 49152


@dataclass(frozen=True)
class FlowRecord:
    """One network flow event: who talked, to which port, from which executable."""

    timestamp: int
    src_ip: str
    dst_port: int
    image_path: str


@dataclass(frozen=True)
class WindowSpec:
    """Sliding-window geometry, all values in seconds."""

    window_len: int = 600
    stride: int = 300
    subwindow_len: int = 3600

    def __post_init__(self):
        if self.window_len <= 0 or self.stride <= 0 or self.subwindow_len <= 0:
            raise ConfigError("window lengths and stride must be positive")
        if self.stride > self.window_len:
            raise ConfigError("stride must not exceed window_len")
        if self.window_len % self.stride != 0:
            raise ConfigError("stride must divide window_len")
        if self.subwindow_len % self.stride != 0:
            raise ConfigError("stride must divide subwindow_len")

    @property
    def snapshots_per_subwindow(self) -> int:
        return self.subwindow_len // self.stride


@dataclass
class WindowedRecords:
    """Records falling into one window of the global sliding grid."""

    window_index: int
    window_start: int
    records: list = field(default_factory=list)


def is_localhost(src_ip: str) -> bool:
    """True iff src_ip is in 127.0.0.0/8 or is the literal token "localhost"."""
    if src_ip == "localhost":
        return True
    try:
        addr = ipaddress.IPv4Address(src_ip)
    except ValueError:
        return False
    return addr.is_loopback


def parse_timestamp(value) -> Optional[int]:
    """Epoch seconds from an int/float or ISO-8601 string; None if unparseable."""
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return int(value)
    if not isinstance(value, str):
        return None
    text = value.strip()
    if not text:
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        dt = datetime.fromisoformat(text)
    except ValueError:
        return None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_timestamp(epoch: int) -> str:
    """Epoch seconds to ISO-8601 UTC with a Z suffix."""
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _classify(timestamp, src_ip, dst_port, image_path):
    """Validate one raw row; returns (record, None) or (None, reject_reason)."""
    ts = parse_timestamp(timestamp)
    if ts is None:
        return None, "malformed"
    try:
        port = int(str(dst_port).strip())
    except (ValueError, TypeError):
        return None, "malformed"
    if port < 0 or port > 65535:
        return None, "malformed"
    ip = str(src_ip).strip() if src_ip is not None else ""
    image = str(image_path).strip() if image_path is not None else ""
    if not ip or not image:
        return None, "missing_field"
    if is_localhost(ip):
        return None, "localhost_src"
    if port >= EPHEMERAL_PORT_MIN:
        return None, "ephemeral_port"
    return FlowRecord(ts, ip, port, image), None


def parse_flow_records(lines: Iterable[str], fmt: str = "csv"):
    """Parse and filter raw lines.

    Returns (records, rejects) where rejects maps every reason in
    REJECT_REASONS to a count. fmt is "csv" (header row, columns in any
    order, extras ignored) or "jsonl" (one object per line).
    """
    rejects = {reason: 0 for reason in REJECT_REASONS}
    records = []
    if fmt == "csv":
        reader = csv.DictReader(lines)
        if reader.fieldnames is None:
            return records, rejects
        missing = [f for f in REQUIRED_FIELDS if f not in reader.fieldnames]
        if missing:
            raise ConfigError(f"csv header lacks required columns: {', '.join(missing)}")
        for row in reader:
            rec, reason = _classify(
                row.get("timestamp"), row.get("src_ip"),
                row.get("dst_port"), row.get("image_path"),
            )
            if rec is not None:
                records.append(rec)
            else:
                rejects[reason] += 1
    elif fmt == "jsonl":
        for line in lines:
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                rejects["malformed"] += 1
                continue
            if not isinstance(obj, dict):
                rejects["malformed"] += 1
                continue
            if "timestamp" not in obj or "dst_port" not in obj:
                rejects["malformed"] += 1
                continue
            if "src_ip" not in obj or "image_path" not in obj:
                rejects["missing_field"] += 1
                continue
            rec, reason = _classify(
                obj["timestamp"], obj["src_ip"], obj["dst_port"], obj["image_path"]
            )
            if rec is not None:
                records.append(rec)
            else:
                rejects[reason] += 1
    else:
        raise ConfigError(f"unknown input format: {fmt!r}")
    return records, rejects


def read_flow_file(path: str, fmt: Optional[str] = None):
    """Parse one file, inferring format from the extension when fmt is None."""
    if fmt is None:
        fmt = "jsonl" if str(path).endswith((".jsonl", ".ndjson")) else "csv"
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_flow_records(fh, fmt)
    except OSError as exc:
        raise ConfigError(f"cannot read input file {path}: {exc}") from exc


def window_records(records: list, spec: WindowSpec) -> list:
    """Group records into overlapping windows on a stride-aligned grid.

    The grid origin is the earliest timestamp floored to a stride multiple.
    Every window index from 0 through the last one containing the latest
    record is emitted, empty windows included. Each record lands in
    window_len / stride consecutive windows.
    """
    if not records:
        return []
    origin = (min(r.timestamp for r in records) // spec.stride) * spec.stride
    latest = max(r.timestamp for r in records)
    n_windows = (latest - origin) // spec.stride + 1
    windows = [
        WindowedRecords(w, origin + w * spec.stride) for w in range(n_windows)
    ]
    for rec in records:
        offset = rec.timestamp - origin
        first = max(0, (offset - spec.window_len) // spec.stride + 1)
        last = min(n_windows - 1, offset // spec.stride)
        for w in range(first, last + 1):
            windows[w].records.append(rec)
    return windows


def write_records_csv(records: Iterable[FlowRecord], path: str) -> None:
    """Canonical four-column csv dump, timestamps in ISO-8601 UTC."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REQUIRED_FIELDS)
        for rec in records:
            writer.writerow(
                [format_timestamp(rec.timestamp), rec.src_ip, rec.dst_port, rec.image_path]
            )


def write_reject_report(rejects: dict, path: str) -> None:
    """Two-column reason,count csv covering every reject reason."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["reason", "count"])
        for reason in REJECT_REASONS:
            writer.writerow([reason, rejects.get(reason, 0)])
