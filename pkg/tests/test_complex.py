import itertools
import random

import pytest

from helpers import complex_of, letters_interner, make_snapshot, random_complex

from zzhd.complexes import (
    VertexInterner,
    associated_asc,
    betti_numbers,
    dump_complex,
    union,
)
from zzhd.errors import ConfigError


def test_asc_of_triangle_edge():
    interner = letters_interner()
    k = complex_of(interner, "abc")
    assert len(k.simplices) == 7  # 3 vertices, 3 edges, 1 triangle
    assert k.simplices_of_dim(2) == [(0, 1, 2)]


def test_asc_truncated_at_max_dim():
    interner = letters_interner()
    k = complex_of(interner, "abcd")
    # All subsets of size <= 3 of a 4-set: 4 + 6 + 4.
    assert len(k.simplices) == 14
    assert all(len(s) <= 3 for s in k.simplices)


def test_asc_face_closure():
    rng = random.Random(3)
    interner = letters_interner()
    for _ in range(30):
        k = random_complex(rng, interner)
        for simplex in k.simplices:
            for size in range(1, len(simplex)):
                for face in itertools.combinations(simplex, size):
                    assert face in k.simplices


def test_edge_cap_enforced():
    interner = VertexInterner()
    snap = make_snapshot({80: {f"exe{i}" for i in range(65)}})
    with pytest.raises(ConfigError):
        associated_asc(snap, 2, interner)
    associated_asc(snap, 2, interner, edge_cap=65)


def test_betti_filled_vs_hollow_triangle():
    interner = letters_interner()
    assert betti_numbers(complex_of(interner, "abc"), 1) == [1, 0]
    assert betti_numbers(complex_of(interner, "ab", "ac", "bc"), 1) == [1, 1]


def test_betti_two_hollow_triangles_sharing_an_edge():
    interner = letters_interner()
    k1 = complex_of(interner, "ab", "ac", "bc")
    k2 = complex_of(interner, "ac", "ad", "cd")
    assert betti_numbers(union(k1, k2), 1) == [1, 2]


def test_betti_square_and_components():
    interner = letters_interner()
    square = complex_of(interner, "ab", "bc", "cd", "ad")
    assert betti_numbers(square, 1) == [1, 1]
    two = complex_of(interner, "ab", "cd")
    assert betti_numbers(two, 1) == [2, 0]
    empty = complex_of(interner)
    assert betti_numbers(empty, 1) == [0, 0]


def test_betti_sphere_boundary():
    # Boundary of a tetrahedron: beta = [1, 0, 1].
    interner = letters_interner()
    snap = make_snapshot({p: s for p, s in enumerate(["abc", "abd", "acd", "bcd"])})
    k = associated_asc(snap, 3, interner)
    assert betti_numbers(k, 2) == [1, 0, 1]


def test_betti_zero_equals_union_find_components():
    rng = random.Random(17)
    interner = letters_interner()
    for _ in range(40):
        k = random_complex(rng, interner)
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (v,) in (s for s in k.simplices if len(s) == 1):
            parent[v] = v
        for a, b in (s for s in k.simplices if len(s) == 2):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        roots = {find(v) for v in parent}
        assert betti_numbers(k, 0) == [len(roots)]


def test_euler_poincare_on_exact_complexes():
    # With hyperedges of <= 3 vertices and max_dim 2 the ASC is not truncated,
    # so the Euler characteristic matches the alternating Betti sum.
    rng = random.Random(23)
    interner = letters_interner()
    for _ in range(40):
        edges = {
            p: set(rng.sample("abcdefgh", rng.randint(1, 3)))
            for p in range(rng.randint(1, 5))
        }
        k = associated_asc(make_snapshot(edges), 2, interner)
        chi = sum((-1) ** (len(s) - 1) for s in k.simplices)
        betti = betti_numbers(k, 2)
        assert chi == betti[0] - betti[1] + betti[2]


def test_union_requires_matching_structure():
    interner = letters_interner()
    other = letters_interner()
    k1 = complex_of(interner, "ab")
    with pytest.raises(ConfigError):
        union(k1, complex_of(interner, "bc", max_dim=3))
    with pytest.raises(ConfigError):
        union(k1, complex_of(other, "bc"))


def test_union_is_set_union():
    interner = letters_interner()
    k1 = complex_of(interner, "ab")
    k2 = complex_of(interner, "bc")
    u = union(k1, k2)
    assert u.simplices == k1.simplices | k2.simplices


def test_dump_complex_sorted(tmp_path):
    interner = letters_interner()
    k = complex_of(interner, "ab", "c")
    path = tmp_path / "complex.tsv"
    dump_complex(k, str(path))
    assert path.read_text().splitlines() == ["0", "1", "2", "0\t1"]
