"""Simplicial complexes associated to hypergraphs, with a static Betti oracle."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import ConfigError
from .hypergraph import HypergraphSnapshot

# Hyperedges wider than this explode combinatorially when expanded to simplices.
MAX_EDGE_VERTICES = 64


class VertexInterner:
    """Stable bidirectional mapping between vertex names and integer ids.

    Intern everything up front (single writer phase), then treat as
    read-only; ids are assigned in first-intern order.
    """

    def __init__(self, names=()):
        self._ids: dict = {}
        self._names: list = []
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> int:
        if name not in self._ids:
            self._ids[name] = len(self._names)
            self._names.append(name)
        return self._ids[name]

    def name_of(self, vid: int) -> str:
        return self._names[vid]

    def __len__(self):
        return len(self._names)


@dataclass(frozen=True)
class SimplicialComplex:
    """A finite simplicial complex over interned vertex ids.

    simplices holds sorted vertex-id tuples, closed under taking faces,
    with dimension at most max_dim.
    """

    simplices: frozenset
    max_dim: int
    interner: VertexInterner

    def simplices_of_dim(self, p: int) -> list:
        return sorted(s for s in self.simplices if len(s) == p + 1)

    @property
    def n_vertices(self) -> int:
        return sum(1 for s in self.simplices if len(s) == 1)


def associated_asc(
    g: HypergraphSnapshot,
    max_dim: int,
    interner: VertexInterner,
    edge_cap: int = MAX_EDGE_VERTICES,
) -> SimplicialComplex:
    """Associated simplicial complex: every subset of a hyperedge with at
    most max_dim + 1 vertices becomes a simplex."""
    if max_dim < 0:
        raise ConfigError("max_dim must be non-negative")
    simplices = set()
    for port in sorted(g.edges):
        members = g.edges[port]
        if len(members) > edge_cap:
            raise ConfigError(
                f"hyperedge for port {port} has {len(members)} vertices, "
                f"exceeding the cap of {edge_cap}"
            )
        ids = sorted(interner.intern(name) for name in members)
        for size in range(1, min(len(ids), max_dim + 1) + 1):
            simplices.update(combinations(ids, size))
    return SimplicialComplex(frozenset(simplices), max_dim, interner)


def union(k1: SimplicialComplex, k2: SimplicialComplex) -> SimplicialComplex:
    """Union complex; both operands must share max_dim and vertex interning."""
    if k1.max_dim != k2.max_dim:
        raise ConfigError("cannot union complexes with different max_dim")
    if k1.interner is not k2.interner:
        raise ConfigError("cannot union complexes with different vertex interning")
    return SimplicialComplex(k1.simplices | k2.simplices, k1.max_dim, k1.interner)


def _gf2_rank(columns: list) -> int:
    """Rank over GF(2) of a matrix given as bitmask columns."""
    pivots: dict = {}
    rank = 0
    for col in columns:
        while col:
            pivot = col.bit_length() - 1
            other = pivots.get(pivot)
            if other is None:
                pivots[pivot] = col
                rank += 1
                break
            col ^= other
    return rank


def _boundary_columns(k: SimplicialComplex, p: int) -> list:
    """Columns of the p-th boundary map as bitmasks over (p-1)-simplex rows."""
    if p <= 0:
        return []
    rows = {s: i for i, s in enumerate(k.simplices_of_dim(p - 1))}
    columns = []
    for simplex in k.simplices_of_dim(p):
        col = 0
        for j in range(len(simplex)):
            facet = simplex[:j] + simplex[j + 1:]
            col ^= 1 << rows[facet]
        columns.append(col)
    return columns


def betti_numbers(k: SimplicialComplex, p_max: int) -> list:
    """Betti numbers beta_0..beta_p_max over GF(2) by boundary-matrix rank.

    beta_p = #p-simplices - rank(boundary_p) - rank(boundary_{p+1}).
    """
    if p_max < 0:
        raise ConfigError("p_max must be non-negative")
    ranks = [_gf2_rank(_boundary_columns(k, p)) for p in range(p_max + 2)]
    betti = []
    for p in range(p_max + 1):
        n_p = len(k.simplices_of_dim(p))
        betti.append(n_p - ranks[p] - ranks[p + 1])
    return betti


def dump_complex(k: SimplicialComplex, path: str) -> None:
    """Debug dump: one simplex per line, vertex ids tab-separated, sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        for simplex in sorted(k.simplices, key=lambda s: (len(s), s)):
            fh.write("\t".join(str(v) for v in simplex) + "\n")
