"""Shared builders for constructing snapshots and complexes in tests."""

from zzhd.complexes import VertexInterner, associated_asc
from zzhd.hypergraph import HypergraphSnapshot


def make_snapshot(edges, src_ip="10.0.0.1", window_index=0):
    """Snapshot from {port: iterable-of-executable-names}."""
    frozen = {port: frozenset(members) for port, members in edges.items()}
    vertices = frozenset().union(*frozen.values()) if frozen else frozenset()
    return HypergraphSnapshot(window_index, src_ip, frozen, vertices)


def complex_of(interner, *maximal_sets, max_dim=2):
    """Complex whose hyperedges are the given vertex-name strings."""
    edges = {i: set(s) for i, s in enumerate(maximal_sets)}
    return associated_asc(make_snapshot(edges), max_dim, interner)


def letters_interner():
    return VertexInterner("abcdefgh")


def random_complex(rng, interner, max_edges=5, max_vertices=8, max_dim=2):
    """Small random complex over the first max_vertices letter vertices."""
    names = "abcdefgh"[:max_vertices]
    edges = {}
    for port in range(rng.randint(0, max_edges)):
        size = rng.randint(1, 4)
        edges[port] = set(rng.sample(names, size))
    return complex_of(interner, *edges.values(), max_dim=max_dim) if edges else complex_of(
        interner, max_dim=max_dim
    )
