"""Per-window hypergraphs: executables as vertices, destination ports as hyperedges."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

from .ingest import WindowedRecords


@dataclass(frozen=True)
class HypergraphSnapshot:
    """Hypergraph of one (source IP, window) pair.

    edges maps a destination port to the frozenset of executables that
    talked to it inside the window; vertices is the union of all members.
    """

    window_index: int
    src_ip: str
    edges: dict
    vertices: frozenset


@dataclass(frozen=True)
class SnapshotStats:
    """Size and shape summary of one snapshot's co-membership graph."""

    n_edges: int
    n_vertices: int
    n_components: int
    diameter: int

    def as_tuple(self):
        return (self.n_edges, self.n_vertices, self.n_components, self.diameter)


def build_snapshot(window: WindowedRecords, src_ip: str) -> HypergraphSnapshot:
    """Snapshot for one source IP: port r contains executable t iff some
    record (src_ip, r, t) fell inside the window."""
    members: dict = {}
    for rec in window.records:
        if rec.src_ip != src_ip:
            continue
        members.setdefault(rec.dst_port, set()).add(rec.image_path)
    edges = {port: frozenset(names) for port, names in members.items()}
    vertices = frozenset().union(*edges.values()) if edges else frozenset()
    return HypergraphSnapshot(window.window_index, src_ip, edges, vertices)


def _skeleton_adjacency(g: HypergraphSnapshot) -> dict:
    """1-skeleton of the hypergraph: vertices co-members of any edge are adjacent."""
    adj = {v: set() for v in g.vertices}
    for members in g.edges.values():
        ordered = sorted(members)
        for i, u in enumerate(ordered):
            for v in ordered[i + 1:]:
                adj[u].add(v)
                adj[v].add(u)
    return adj


def _bfs_depths(adj: dict, start) -> dict:
    depths = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in depths:
                depths[v] = depths[u] + 1
                queue.append(v)
    return depths


def snapshot_stats(g: HypergraphSnapshot) -> SnapshotStats:
    """Edge/vertex counts plus component count and largest-component diameter.

    The diameter is the maximum shortest-path length inside the largest
    component of the 1-skeleton; when several components tie on vertex
    count, the largest diameter among them is reported. Empty snapshots
    give all zeros; an isolated vertex has diameter 0.
    """
    adj = _skeleton_adjacency(g)
    components = []
    seen = set()
    for v in sorted(adj):
        if v in seen:
            continue
        comp = set(_bfs_depths(adj, v))
        seen |= comp
        components.append(comp)
    if not components:
        return SnapshotStats(len(g.edges), 0, 0, 0)
    top_size = max(len(c) for c in components)
    diameter = 0
    for comp in components:
        if len(comp) != top_size:
            continue
        for v in comp:
            depth = max(_bfs_depths(adj, v).values())
            diameter = max(diameter, depth)
    return SnapshotStats(len(g.edges), len(adj), len(components), diameter)


def dump_snapshot_csv(g: HypergraphSnapshot, path: str) -> None:
    """Debug dump: one port,executable row per membership, sorted."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["port", "executable"])
        for port in sorted(g.edges):
            for name in sorted(g.edges[port]):
                writer.writerow([port, name])
