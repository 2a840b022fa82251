"""Block designs, block-design mechanisms and their one-bit resolutions.

Vertices are ``0..v-1`` internally; the text edge-list format is 1-based.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import DesignError, MechanismError, ResourceError
from .mechanisms import Mechanism

DEFAULT_MAX_EDGES = 200_000


def binom(n: int, k: int) -> int:
    """Binomial coefficient with ``binom(n, k) = 0`` for ``k < 0`` or ``k > n``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


@dataclass(frozen=True)
class DesignParams:
    """Verified symmetry parameters; ``k`` is None for a non-uniform RPBD."""

    v: int
    b: int
    r: int
    k: int | None
    lam: int
    ok: bool = field(default=True, init=False)

    def __bool__(self):
        return True

    def as_tuple(self):
        return (self.v, self.b, self.r, self.k, self.lam)


@dataclass(frozen=True)
class DesignViolation:
    """Why a hypergraph is not a regular, pairwise-balanced design."""

    prop: str
    message: str
    witness: tuple
    ok: bool = field(default=False, init=False)

    def __bool__(self):
        return False


@dataclass(frozen=True)
class BlockDesign:
    """A hypergraph on ``num_vertices`` vertices with an ordered edge list."""

    num_vertices: int
    edges: tuple[frozenset[int], ...]

    def __post_init__(self):
        v = self.num_vertices
        edges = tuple(frozenset(e) for e in self.edges)
        for e in edges:
            if not e:
                raise DesignError("edges must be non-empty")
            if min(e) < 0 or max(e) >= v:
                raise DesignError(f"edge {sorted(e)} has a vertex outside 0..{v - 1}")
        object.__setattr__(self, "edges", edges)

    @property
    def b(self) -> int:
        return len(self.edges)

    @property
    def params(self) -> DesignParams:
        res = verify_design(self)
        if not res:
            raise DesignError(res.message)
        return res


def verify_design(G: BlockDesign) -> DesignParams | DesignViolation:
    """Recount regularity, uniformity and pairwise balance exhaustively.

    Returns the parameters on success, otherwise the first violated property
    with a counterexample. Uniformity is optional: a regular pairwise-balanced
    hypergraph with mixed edge sizes passes with ``k=None``.
    """
    v = G.num_vertices
    degree = [0] * v
    pair_count: dict[tuple[int, int], int] = defaultdict(int)
    for e in G.edges:
        verts = sorted(e)
        for x in verts:
            degree[x] += 1
        for pair in itertools.combinations(verts, 2):
            pair_count[pair] += 1

    r = degree[0]
    for x, deg in enumerate(degree):
        if deg != r:
            return DesignViolation(
                "regular", f"vertex {x} has degree {deg}, vertex 0 has degree {r}", (x,)
            )

    lam = pair_count.get((0, 1), 0) if v >= 2 else 0
    for pair in itertools.combinations(range(v), 2):
        if pair_count.get(pair, 0) != lam:
            return DesignViolation(
                "pairwise_balanced",
                f"pair {pair} lies in {pair_count.get(pair, 0)} edges, expected {lam}",
                pair,
            )

    sizes = {len(e) for e in G.edges}
    k = sizes.pop() if len(sizes) == 1 else None
    return DesignParams(v, G.b, r, k, lam)


def complete_block_design(v: int, k: int, *, max_edges: int = DEFAULT_MAX_EDGES) -> BlockDesign:
    """All ``k``-subsets of ``v`` vertices, in lexicographic order."""
    if v < 2:
        raise DesignError("need at least two vertices")
    if not 1 <= k <= v - 1:
        raise DesignError(f"k must lie in [1, v-1], got k={k}, v={v}")
    b = binom(v, k)
    if b > max_edges:
        raise ResourceError(f"C({v},{k}) = {b} edges exceeds the cap of {max_edges}")
    return BlockDesign(v, tuple(frozenset(e) for e in itertools.combinations(range(v), k)))


def cbd_params(v: int, k: int) -> tuple[int, int, int, int, int]:
    """Closed-form ``(v, b, r, k, lambda)`` of the ``(v, k)`` complete design."""
    return (v, binom(v, k), binom(v - 1, k - 1), k, binom(v - 2, k - 2))


def concat_designs(G1: BlockDesign, G2: BlockDesign) -> BlockDesign:
    """Union of two edge lists on the same vertex set (edges of ``G1`` first)."""
    if G1.num_vertices != G2.num_vertices:
        raise DesignError(
            f"vertex sets differ: {G1.num_vertices} vs {G2.num_vertices} vertices"
        )
    return BlockDesign(G1.num_vertices, G1.edges + G2.edges)


def incidence_matrix(G: BlockDesign) -> np.ndarray:
    A = np.zeros((G.num_vertices, G.b), dtype=np.int64)
    for j, e in enumerate(G.edges):
        A[list(e), j] = 1
    return A


def bd_mechanism(G: BlockDesign, c, d) -> Mechanism:
    """(c, d)-valued design mechanism: map 1 to ``c``, 0 to ``d``, divide by ``c r + d (b - r)``."""
    c, d = Fraction(c), Fraction(d)
    if c < 0 or d < 0:
        raise MechanismError("c and d must be non-negative")
    res = verify_design(G)
    if not res:
        raise DesignError(f"design is not regular: {res.message}")
    norm = c * res.r + d * (G.b - res.r)
    if norm == 0:
        raise MechanismError("normalizer c*r + d*(b-r) is zero")
    hi, lo = c / norm, d / norm
    rows = [[hi if x in e else lo for e in G.edges] for x in range(G.num_vertices)]
    return Mechanism(rows)


def write_edge_list(G: BlockDesign, fh: TextIO) -> None:
    """One edge per line, 1-based vertex indices separated by spaces."""
    for e in G.edges:
        fh.write(" ".join(str(x + 1) for x in sorted(e)) + "\n")


def read_edge_list(fh: Iterable[str], num_vertices: int | None = None) -> BlockDesign:
    edges = []
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        edges.append(frozenset(int(tok) - 1 for tok in line.split()))
    if num_vertices is None:
        num_vertices = 1 + max(max(e) for e in edges)
    return BlockDesign(num_vertices, tuple(edges))


@dataclass(frozen=True)
class DualPairPartition:
    """Perfect matching of columns into pairs whose sum is a constant vector.

    ``scales[i]`` is the constant ``s`` with ``Q^i + Q^j = s * 1`` for
    ``pairs[i] = (i, j)``.
    """

    pairs: tuple[tuple[int, int], ...]
    scales: tuple[Fraction, ...]

    @property
    def uniform(self) -> bool:
        return len(set(self.scales)) == 1

    @property
    def pair_scale(self) -> Fraction:
        if not self.uniform:
            raise DesignError("dual pairs have different scales; resolution would need a non-uniform P_U")
        return self.scales[0]

    def __len__(self):
        return len(self.pairs)


def _shape(col: Sequence[Fraction]) -> tuple[Fraction, ...]:
    base = col[0]
    return tuple(q - base for q in col)


def _neg(shape: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    return tuple(-q for q in shape)


def _finish(Q: Mechanism, pairs: list[tuple[int, int]]) -> DualPairPartition:
    pairs = sorted((min(i, j), max(i, j)) for i, j in pairs)
    scales = tuple(Q[0, i] + Q[0, j] for i, j in pairs)
    return DualPairPartition(tuple(pairs), scales)


def _match_uniform(cols) -> list[tuple[int, int]] | None:
    """Pair every column with its exact complement ``s * 1 - col``, ``s = 2 / m``; None if impossible."""
    s = Fraction(2, len(cols))
    where: dict[tuple, list[int]] = defaultdict(list)
    for j in reversed(range(len(cols))):
        where[cols[j]].append(j)  # pop() yields the smallest index
    used = [False] * len(cols)
    pairs = []
    for i, col in enumerate(cols):
        if used[i]:
            continue
        used[i] = True
        bucket = where[tuple(s - q for q in col)]
        while bucket and used[bucket[-1]]:
            bucket.pop()
        if not bucket:
            return None
        j = bucket.pop()
        used[j] = True
        pairs.append((i, j))
    return pairs


def _match_any(cols) -> list[tuple[int, int]]:
    """Pair columns whose deviations from a constant vector cancel, at any scale."""
    m = len(cols)
    buckets: dict[tuple, list[int]] = defaultdict(list)
    for j in reversed(range(m)):
        buckets[_shape(cols[j])].append(j)
    used = [False] * m
    pairs = []
    for i in range(m):
        if used[i]:
            continue
        used[i] = True
        bucket = buckets[_neg(_shape(cols[i]))]
        while bucket and used[bucket[-1]]:
            bucket.pop()
        if not bucket:
            raise DesignError(f"column {i} has no dual column; mechanism is not resolvable this way")
        j = bucket.pop()
        used[j] = True
        pairs.append((i, j))
    return pairs


def dual_pair_partition(Q: Mechanism, design: BlockDesign | None = None) -> DualPairPartition:
    """Match every column with a dual column.

    With ``design`` given the match is the set complement of each edge (the
    columns of a design mechanism follow its edges). Otherwise columns are
    matched exactly, smallest available index first: a matching in which
    every pair sums to ``(2/m) * 1`` is preferred, since only that one
    resolves under uniform shared randomness; otherwise any pairs whose sums
    are constant vectors are accepted.
    """
    m = Q.num_outputs
    if m % 2:
        raise DesignError(f"odd number of columns ({m}); no perfect dual matching")

    if design is not None:
        if design.b != m or design.num_vertices != Q.num_inputs:
            raise DesignError("design does not match the mechanism's shape")
        full = frozenset(range(design.num_vertices))
        where = {e: j for j, e in enumerate(design.edges)}
        if len(where) != m:
            raise DesignError("design has repeated edges; complement pairing is ambiguous")
        pairs, seen = [], set()
        for j, e in enumerate(design.edges):
            if j in seen:
                continue
            partner = where.get(full - e)
            if partner is None or partner in seen or partner == j:
                raise DesignError(f"edge {sorted(e)} has no available complement edge")
            seen.update((j, partner))
            pairs.append((j, partner))
        part = _finish(Q, pairs)
        check_partition(Q, part)
        return part

    cols = Q.columns()
    pairs = _match_uniform(cols) or _match_any(cols)
    return _finish(Q, pairs)


def check_partition(Q: Mechanism, part: DualPairPartition) -> None:
    flat = [j for pair in part.pairs for j in pair]
    if sorted(flat) != list(range(Q.num_outputs)):
        raise DesignError("pairs do not cover every column exactly once")
    for (i, j), s in zip(part.pairs, part.scales):
        if any(Q[x, i] + Q[x, j] != s for x in range(Q.num_inputs)):
            raise DesignError(f"columns {i} and {j} do not sum to a constant vector")


@dataclass(frozen=True)
class Resolution:
    """Uniform shared randomness over the pairs plus a one-bit mechanism per pair.

    Output ``z = 0`` of mechanism ``u`` is column ``pairs[u][0]`` of the
    original matrix and ``z = 1`` is column ``pairs[u][1]``.
    """

    prob_u: tuple[Fraction, ...]
    mechanisms: tuple[Mechanism, ...]
    pairs: tuple[tuple[int, int], ...]

    @property
    def u_count(self) -> int:
        return len(self.mechanisms)

    def reassemble(self) -> Mechanism:
        """Rebuild the original matrix from ``P_U(u) * Q_u(z|x)`` placed at its column."""
        v = self.mechanisms[0].num_inputs
        m = 2 * self.u_count
        rows = [[Fraction(0)] * m for _ in range(v)]
        for p_u, mech, pair in zip(self.prob_u, self.mechanisms, self.pairs):
            for z, col in enumerate(pair):
                for x in range(v):
                    rows[x][col] = p_u * mech[x, z]
        return Mechanism(rows, allow_zero_columns=True)


def resolve(Q: Mechanism, partition: DualPairPartition) -> Resolution:
    """Split ``Q`` into uniform ``P_U`` and per-pair one-bit mechanisms ``pair / s``."""
    check_partition(Q, partition)
    s = partition.pair_scale
    C = len(partition)
    mechanisms = []
    for i, j in partition.pairs:
        rows = [[Q[x, i] / s, Q[x, j] / s] for x in range(Q.num_inputs)]
        mechanisms.append(Mechanism(rows, allow_zero_columns=True))
    if s * C != 1:
        raise DesignError("pair scales do not sum to one")
    return Resolution(tuple([Fraction(1, C)] * C), tuple(mechanisms), partition.pairs)
