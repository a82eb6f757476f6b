"""Zigzag persistence over interwoven unions of a complex sequence.

The input sequence K_0, ..., K_{n-1} is augmented with unions to
K_0 <= K_0 u K_1 >= K_1 <= ... >= K_{n-1} and the homology of every space
is threaded through the inclusion-induced maps. Events at a union step
between i and i+1 are indexed at the midpoint i + 1/2, except when
K_i <= K_{i+1}: then the union equals K_{i+1}, the step is not a real
event of its own, and the index collapses to i + 1 so that monotone
sequences reproduce standard persistence. All index arithmetic is done
on doubled integers; INF marks features alive in the final complex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .complexes import SimplicialComplex
from .errors import ConfigError, InternalError
from .ingest import WindowSpec

INF = math.inf


@dataclass(frozen=True)
class Interval:
    """One persistence interval; birth/death are snapshot indices in exact
    halves, death possibly INF."""

    dim: int
    birth: float
    death: float


@dataclass
class Barcode:
    """All intervals of one homology dimension for a snapshot sequence."""

    dim: int
    n_snapshots: int
    intervals: list = field(default_factory=list)


def format_index(value: float) -> str:
    """Render a half-integer index: 2 -> "2", 1.5 -> "1.5", INF -> "inf"."""
    if value == INF:
        return "inf"
    if value == int(value):
        return str(int(value))
    return f"{value:.1f}"


def snapshot_index_to_time(index: float, spec: WindowSpec, origin: int, n_snapshots: int) -> int:
    """Epoch seconds of a (half-integer) snapshot index; INF maps to the
    start of the final snapshot."""
    if index == INF:
        index = n_snapshots - 1
    return int(origin + index * spec.stride)


def _reduce(vec: int, table: dict) -> int:
    """Reduce a bitmask vector against a pivot table {high bit -> vector}."""
    while vec:
        pivot = vec.bit_length() - 1
        entry = table.get(pivot)
        if entry is None:
            break
        vec ^= entry
    return vec


class _HomologySpace:
    """GF(2) homology of one complex, with cycles expressed over a simplex
    id space shared by the whole zigzag call.

    Reduces the boundary matrix in face-before-coface order, keeps the
    unpaired cycles as class representatives, and can express any cycle
    of the complex in that representative basis modulo boundaries.
    """

    def __init__(self, simplex_ids: list, facet_masks: dict, id_dims: dict, p_max: int):
        lows: dict = {}
        cycles: dict = {}
        paired = set()
        boundaries = []
        for sid in simplex_ids:
            col = facet_masks[sid]
            chain = 1 << sid
            while col:
                low = col.bit_length() - 1
                entry = lows.get(low)
                if entry is None:
                    break
                col ^= entry[0]
                chain ^= entry[1]
            if col == 0:
                cycles[sid] = chain
            else:
                lows[col.bit_length() - 1] = (col, chain)
                paired.add(col.bit_length() - 1)
                boundaries.append(col)

        # reps[i] = (dim, cycle chain) for the i-th surviving class.
        self.reps: list = []
        self._solver: dict = {}
        for col in boundaries:
            pivot = col.bit_length() - 1
            if pivot in self._solver:
                raise InternalError("duplicate boundary pivot")
            self._solver[pivot] = (col, 0)
        for sid in simplex_ids:
            if sid not in cycles or sid in paired or id_dims[sid] > p_max:
                continue
            vec, tags = cycles[sid], 1 << len(self.reps)
            while vec:
                pivot = vec.bit_length() - 1
                entry = self._solver.get(pivot)
                if entry is None:
                    break
                vec ^= entry[0]
                tags ^= entry[1]
            if vec == 0:
                raise InternalError("homology representative reduced to zero")
            self._solver[vec.bit_length() - 1] = (vec, tags)
            self.reps.append((id_dims[sid], cycles[sid]))

    def rep_indices(self, p: int) -> list:
        return [i for i, (dim, _) in enumerate(self.reps) if dim == p]

    def class_chain(self, mask: int) -> int:
        """Cycle chain for a class given as a representative bitmask."""
        chain = 0
        for i, (_, rep) in enumerate(self.reps):
            if mask >> i & 1:
                chain ^= rep
        return chain

    def express(self, chain: int) -> int:
        """Coordinates of a cycle in the representative basis, mod boundaries."""
        tags = 0
        while chain:
            pivot = chain.bit_length() - 1
            entry = self._solver.get(pivot)
            if entry is None:
                raise InternalError("chain is not a cycle of this space")
            chain ^= entry[0]
            tags ^= entry[1]
        return tags


def _build_spaces(sequence: list, p_max: int):
    """Homology of every space in the augmented sequence, plus nesting flags."""
    all_simplices = set()
    for k in sequence:
        all_simplices |= k.simplices
    ordered = sorted(all_simplices, key=lambda s: (len(s), s))
    ids = {simplex: i for i, simplex in enumerate(ordered)}
    id_dims = {i: len(simplex) - 1 for simplex, i in ids.items()}
    facet_masks = {}
    for simplex, sid in ids.items():
        mask = 0
        for j in range(len(simplex)):
            facet = simplex[:j] + simplex[j + 1:]
            if facet:
                try:
                    mask ^= 1 << ids[facet]
                except KeyError:
                    raise InternalError("complex is not closed under faces")
        facet_masks[sid] = mask

    def space_of(simplices) -> _HomologySpace:
        sids = sorted(ids[s] for s in simplices)
        return _HomologySpace(sids, facet_masks, id_dims, p_max)

    spaces = [space_of(sequence[0].simplices)]
    nested_up = []
    for i in range(len(sequence) - 1):
        left, right = sequence[i].simplices, sequence[i + 1].simplices
        spaces.append(space_of(left | right))
        spaces.append(space_of(right))
        nested_up.append(left <= right)
    return spaces, nested_up


def _sweep_dim(spaces: list, nested_up: list, p: int) -> list:
    """Thread dimension-p classes through the augmented sequence.

    Threads are kept in right-filtration (flag) order: classes appearing
    via the kernel of a backward map enter at the bottom, classes born
    under a forward map at the top, and survival is decided bottom-first.
    Returns (birth, death) pairs in doubled indices, death None for INF.
    """
    emitted = []
    flag = [[0, 1 << m] for m in spaces[0].rep_indices(p)]
    for i in range(len(nested_up)):
        up_time = 2 * i + 2 if nested_up[i] else 2 * i + 1
        down_time = 2 * i + 2

        # Forward arrow K_i -> union: push classes in, newborns on top.
        src, dst = spaces[2 * i], spaces[2 * i + 1]
        kept: dict = {}
        new_flag = []
        for birth, vec in flag:
            image = _reduce(dst.express(src.class_chain(vec)), kept)
            if image == 0:
                emitted.append((birth, up_time))
            else:
                kept[image.bit_length() - 1] = image
                new_flag.append([birth, image])
        for m in dst.rep_indices(p):
            residue = _reduce(1 << m, kept)
            if residue:
                kept[residue.bit_length() - 1] = residue
                new_flag.append([up_time, residue])
        flag = new_flag
        if len(flag) != len(dst.rep_indices(p)):
            raise InternalError("thread count mismatch after forward step")

        # Backward arrow union <- K_{i+1}: survivors pull back through the
        # induced map, its kernel enters at the flag bottom.
        src, dst = spaces[2 * i + 2], spaces[2 * i + 1]
        table: dict = {}
        kernel = []
        for m in src.rep_indices(p):
            vec, pre = dst.express(src.class_chain(1 << m)), 1 << m
            while vec:
                pivot = vec.bit_length() - 1
                entry = table.get(pivot)
                if entry is None:
                    break
                vec ^= entry[0]
                pre ^= entry[1]
            if vec == 0:
                kernel.append(pre)
            else:
                table[vec.bit_length() - 1] = (vec, pre)
        survivors = []
        for birth, vec in flag:
            pre = 0
            while vec:
                pivot = vec.bit_length() - 1
                entry = table.get(pivot)
                if entry is None:
                    break
                vec ^= entry[0]
                pre ^= entry[1]
            if vec == 0:
                survivors.append([birth, pre])
            else:
                emitted.append((birth, down_time))
                table[vec.bit_length() - 1] = (vec, pre)
        flag = [[down_time, pre] for pre in kernel] + survivors
        if len(flag) != len(src.rep_indices(p)):
            raise InternalError("thread count mismatch after backward step")

    for birth, _ in flag:
        emitted.append((birth, None))
    return emitted


def zigzag_barcode(sequence: list, p_max: int = 1) -> list:
    """Barcodes of the interwoven-union zigzag of a complex sequence.

    Returns one Barcode per dimension 0..p_max, intervals sorted by
    (birth, death). Every complex must share vertex interning and max_dim,
    and max_dim must be at least p_max + 1 so that dimension-p_max
    features can die by getting filled.
    """
    if not sequence:
        raise ConfigError("cannot compute a barcode of an empty sequence")
    if p_max < 0:
        raise ConfigError("p_max must be non-negative")
    first = sequence[0]
    for k in sequence:
        if not isinstance(k, SimplicialComplex):
            raise ConfigError("sequence entries must be SimplicialComplex")
        if k.max_dim != first.max_dim:
            raise ConfigError("all complexes in a sequence must share max_dim")
        if k.interner is not first.interner:
            raise ConfigError("all complexes in a sequence must share vertex interning")
    if first.max_dim < p_max + 1:
        raise ConfigError("max_dim must be at least p_max + 1")

    spaces, nested_up = _build_spaces(sequence, p_max)
    barcodes = []
    for p in range(p_max + 1):
        intervals = []
        for birth, death in _sweep_dim(spaces, nested_up, p):
            if death is not None and birth == death:
                continue
            intervals.append(
                Interval(p, birth / 2.0, INF if death is None else death / 2.0)
            )
        intervals.sort(key=lambda iv: (iv.birth, iv.death))
        barcodes.append(Barcode(p, len(sequence), intervals))
    return barcodes


def write_barcode_csv(barcodes: list, path: str) -> None:
    """dim,birth,death rows; half-integers as decimals, INF as "inf"."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dim", "birth", "death"])
        for barcode in barcodes:
            for iv in barcode.intervals:
                writer.writerow([iv.dim, format_index(iv.birth), format_index(iv.death)])


def read_barcode_csv(path: str) -> dict:
    """Inverse of write_barcode_csv: {dim: [(birth, death), ...]}."""
    import csv

    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            birth = float(row["birth"])
            death = INF if row["death"] == "inf" else float(row["death"])
            out.setdefault(int(row["dim"]), []).append((birth, death))
    return out
