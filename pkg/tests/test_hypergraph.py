import random

from helpers import make_snapshot, random_complex, letters_interner

from zzhd.complexes import VertexInterner, associated_asc, betti_numbers
from zzhd.hypergraph import build_snapshot, dump_snapshot_csv, snapshot_stats
from zzhd.ingest import FlowRecord, WindowedRecords


def test_build_snapshot_groups_by_port_for_one_ip():
    window = WindowedRecords(0, 0, [
        FlowRecord(1, "10.0.0.1", 80, "chrome.exe"),
        FlowRecord(2, "10.0.0.1", 80, "python.exe"),
        FlowRecord(3, "10.0.0.1", 443, "chrome.exe"),
        FlowRecord(4, "10.0.0.2", 80, "word.exe"),
    ])
    snap = build_snapshot(window, "10.0.0.1")
    assert snap.edges == {
        80: frozenset({"chrome.exe", "python.exe"}),
        443: frozenset({"chrome.exe"}),
    }
    assert snap.vertices == frozenset({"chrome.exe", "python.exe"})


def test_build_snapshot_empty_window():
    snap = build_snapshot(WindowedRecords(3, 900, []), "10.0.0.1")
    assert snap.edges == {} and snap.vertices == frozenset()
    assert snapshot_stats(snap).as_tuple() == (0, 0, 0, 0)


def test_stats_single_triangle_edge():
    snap = make_snapshot({80: "abc"})
    assert snapshot_stats(snap).as_tuple() == (1, 3, 1, 1)


def test_stats_two_components_path_diameter():
    snap = make_snapshot({1: "ab", 2: "bc", 3: "de"})
    assert snapshot_stats(snap).as_tuple() == (3, 5, 2, 2)


def test_stats_isolated_vertex_has_zero_diameter():
    snap = make_snapshot({1: "a"})
    assert snapshot_stats(snap).as_tuple() == (1, 1, 1, 0)


def test_stats_tied_largest_components_use_max_diameter():
    # Both components have 3 vertices; one is a triangle (diameter 1),
    # the other a path (diameter 2). The tie reports the larger diameter.
    snap = make_snapshot({1: "abc", 2: "de", 3: "ef"})
    assert snapshot_stats(snap).as_tuple() == (3, 6, 2, 2)


def test_component_count_matches_betti_zero():
    rng = random.Random(11)
    interner = letters_interner()
    for _ in range(50):
        edges = {
            p: set(rng.sample("abcdefgh", rng.randint(1, 4)))
            for p in range(rng.randint(1, 5))
        }
        snap = make_snapshot(edges)
        betti = betti_numbers(associated_asc(snap, 2, interner), 1)
        assert snapshot_stats(snap).n_components == betti[0]


def test_stats_match_brute_force_shortest_paths():
    rng = random.Random(5)
    for _ in range(40):
        names = "abcdefgh"
        edges = {
            p: set(rng.sample(names, rng.randint(1, 4)))
            for p in range(rng.randint(1, 5))
        }
        snap = make_snapshot(edges)
        stats = snapshot_stats(snap)

        verts = sorted(snap.vertices)
        dist = {(u, v): (0 if u == v else None) for u in verts for v in verts}
        for members in edges.values():
            for u in members:
                for v in members:
                    if u != v:
                        dist[(u, v)] = 1
        for mid in verts:  # Floyd-Warshall
            for u in verts:
                for v in verts:
                    a, b = dist[(u, mid)], dist[(mid, v)]
                    if a is not None and b is not None:
                        if dist[(u, v)] is None or a + b < dist[(u, v)]:
                            dist[(u, v)] = a + b

        comps = []
        for v in verts:
            group = frozenset(u for u in verts if dist[(v, u)] is not None)
            if group not in comps:
                comps.append(group)
        assert stats.n_components == len(comps)
        assert stats.n_vertices == len(verts)
        if comps:
            top = max(len(c) for c in comps)
            want = max(
                max(dist[(u, v)] for u in c for v in c)
                for c in comps if len(c) == top
            )
            assert stats.diameter == want


def test_dump_snapshot_csv(tmp_path):
    snap = make_snapshot({443: {"b.exe", "a.exe"}, 80: {"a.exe"}})
    path = tmp_path / "snap.csv"
    dump_snapshot_csv(snap, str(path))
    assert path.read_text().splitlines() == [
        "port,executable",
        "80,a.exe",
        "443,a.exe",
        "443,b.exe",
    ]


def test_interner_is_stable():
    interner = VertexInterner()
    a = interner.intern("x.exe")
    b = interner.intern("y.exe")
    assert interner.intern("x.exe") == a
    assert interner.name_of(b) == "y.exe"
    assert len(interner) == 2
