"""Block designs, design mechanisms, dual pairs and resolutions."""

import io
import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onebit_put.designs import (
    BlockDesign,
    DualPairPartition,
    bd_mechanism,
    binom,
    cbd_params,
    complete_block_design,
    concat_designs,
    dual_pair_partition,
    incidence_matrix,
    read_edge_list,
    resolve,
    verify_design,
    write_edge_list,
)
from onebit_put.errors import DesignError, MechanismError, ResourceError
from onebit_put.mechanisms import Mechanism, PrivacyConstraint, check_ldp, check_one_bit, satisfies

F = Fraction

EXAMPLE_A = [
    [1, 1, 1, 0, 0, 0],
    [1, 0, 0, 1, 1, 0],
    [0, 1, 0, 1, 0, 1],
    [0, 0, 1, 0, 1, 1],
]


def counted_params(G):
    """(v, b, r, lambda) by brute-force counting, independent of verify_design."""
    A = incidence_matrix(G)
    degrees = set(A.sum(axis=1).tolist())
    pairs = {int((A[i] * A[j]).sum()) for i, j in itertools.combinations(range(G.num_vertices), 2)}
    assert len(degrees) == 1 and len(pairs) <= 1
    return (G.num_vertices, G.b, degrees.pop(), pairs.pop() if pairs else 0)


def rpbd(v):
    a = (v - 1) // 2
    return concat_designs(complete_block_design(v, a), complete_block_design(v, a + 1))


# ---------------------------------------------------------------- complete designs


def test_cbd_4_2():
    G = complete_block_design(4, 2)
    assert verify_design(G).as_tuple() == (4, 6, 3, 2, 1)
    assert incidence_matrix(G).tolist() == EXAMPLE_A


def test_cbd_2_1():
    G = complete_block_design(2, 1)
    assert verify_design(G).as_tuple() == (2, 2, 1, 1, 0)
    assert np.array_equal(incidence_matrix(G), np.eye(2, dtype=np.int64))


def test_cbd_5_2():
    assert verify_design(complete_block_design(5, 2)).as_tuple() == (5, 10, 4, 2, 1)


@pytest.mark.parametrize("v", range(2, 13))
def test_cbd_params_match_counts(v):
    for k in range(1, v):
        G = complete_block_design(v, k)
        res = verify_design(G)
        assert res.as_tuple() == cbd_params(v, k)
        assert counted_params(G) == (v, res.b, res.r, res.lam)
        assert incidence_matrix(G).sum(axis=1).tolist() == [res.r] * v


def test_binom_out_of_range_is_zero():
    assert binom(0, -1) == 0 and binom(3, 5) == 0 and binom(4, 2) == 6


def test_cbd_edges_are_lexicographic():
    G = complete_block_design(5, 3)
    assert [tuple(sorted(e)) for e in G.edges] == list(itertools.combinations(range(5), 3))


def test_cbd_cap_names_binomial():
    with pytest.raises(ResourceError, match=r"C\(22,11\)"):
        complete_block_design(22, 11)


@pytest.mark.parametrize("k", [0, 4])
def test_cbd_k_out_of_range(k):
    with pytest.raises(DesignError):
        complete_block_design(4, k)


# ---------------------------------------------------------------- verification and unions


def test_deleted_edge_fails_regularity():
    G = complete_block_design(4, 2)
    res = verify_design(BlockDesign(4, G.edges[1:]))
    assert not res and res.prop == "regular"


def test_pairwise_balance_violation_reported():
    # 2-regular on 4 vertices but pair (0, 1) is covered twice
    G = BlockDesign(4, (frozenset({0, 1}), frozenset({0, 1}), frozenset({2, 3}), frozenset({2, 3})))
    res = verify_design(G)
    assert not res and res.prop == "pairwise_balanced"


@pytest.mark.parametrize("v, expected", [(3, (6, 3, 1)), (5, (20, 10, 4)), (7, (70, 35, 15))])
def test_rpbd_union(v, expected):
    res = verify_design(rpbd(v))
    assert (res.b, res.r, res.lam) == expected
    assert res.k is None
    a = (v - 1) // 2
    assert expected == (2 * binom(v, a), binom(v, a), binom(v - 1, a - 1))
    assert counted_params(rpbd(v))[1:] == expected


def test_concat_vertex_mismatch():
    with pytest.raises(DesignError):
        concat_designs(complete_block_design(3, 1), complete_block_design(4, 1))


def test_edge_list_round_trip():
    G = rpbd(5)
    buf = io.StringIO()
    write_edge_list(G, buf)
    assert buf.getvalue().splitlines()[0] == "1 2"
    assert read_edge_list(io.StringIO(buf.getvalue()), 5) == G


# ---------------------------------------------------------------- design mechanisms


def test_example_mechanism_exact():
    c, d = F(5, 7), F(2, 9)
    Q = bd_mechanism(complete_block_design(4, 2), c, d)
    expect = [[(c if a else d) / (3 * (c + d)) for a in row] for row in EXAMPLE_A]
    assert [list(r) for r in Q.rows] == expect
    assert not check_one_bit(Q)


def test_equal_values_give_uniform_rows():
    Q = bd_mechanism(complete_block_design(5, 2), F(1, 3), F(1, 3))
    assert all(q == F(1, 10) for row in Q.rows for q in row)


def test_normalizer_nine():
    Q = bd_mechanism(complete_block_design(4, 2), 2, 1)
    assert Q[0, 0] == F(2, 9) and Q[0, 5] == F(1, 9)
    assert all(sum(row) == 1 for row in Q.rows)


def test_zero_normalizer_and_irregular_design():
    with pytest.raises(MechanismError):
        bd_mechanism(complete_block_design(4, 2), 0, 0)
    G = complete_block_design(4, 2)
    with pytest.raises(DesignError):
        bd_mechanism(BlockDesign(4, G.edges[1:]), 2, 1)


def _cd(eps, delta):
    c = PrivacyConstraint.ldp(eps, delta)
    e = c.growth
    return c, (e + c.delta) / (e + 1), (1 - c.delta) / (e + 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.floats(0.05, 4), st.sampled_from([0, 0.05, 0.2, 0.5, 1]))
def test_resolved_design_mechanisms_pass_ldp(v, eps, delta):
    c, hi, lo = _cd(eps, delta)
    G = complete_block_design(v, v // 2) if v % 2 == 0 else rpbd(v)
    Q = bd_mechanism(G, hi, lo)
    res = resolve(Q, dual_pair_partition(Q, design=G))
    assert all(check_one_bit(m) and satisfies(m, c) for m in res.mechanisms)
    assert res.reassemble() == Q


# ---------------------------------------------------------------- dual pairs and resolution


def test_example_pairs_and_resolution():
    G = complete_block_design(4, 2)
    Q = bd_mechanism(G, 3, 1)
    for part in (dual_pair_partition(Q, design=G), dual_pair_partition(Q)):
        assert part.pairs == ((0, 5), (1, 4), (2, 3))
    res = resolve(Q, part)
    assert res.prob_u == (F(1, 3),) * 3
    for (i, j), m in zip(part.pairs, res.mechanisms):
        assert [list(r) for r in m.rows] == [[3 * Q[x, i], 3 * Q[x, j]] for x in range(4)]


def _diag(v, c):
    return Mechanism(
        [[F(c) * (x == j) / v for j in range(v)] + [(1 - F(c) * (x == j)) / v for j in range(v)] for x in range(v)]
    )


@pytest.mark.parametrize("v", [2, 3, 5])
def test_diagonal_pairs(v):
    part = dual_pair_partition(_diag(v, F(3, 10)))
    assert part.pairs == tuple((i, i + v) for i in range(v))
    assert part.pair_scale == F(1, v)


def test_non_uniform_pairs_accepted_when_no_uniform_matching():
    Q = Mechanism([[F(1, 2), F(1, 4), F(1, 8), F(1, 8)], [F(1, 8), F(1, 4), F(1, 2), F(1, 8)]])
    part = dual_pair_partition(Q)
    assert part.pairs == ((0, 2), (1, 3))
    assert part.scales == (F(5, 8), F(3, 8)) and not part.uniform
    with pytest.raises(DesignError):
        resolve(Q, part)


def test_two_column_single_pair():
    Q = Mechanism([[F(1, 3), F(2, 3)], [F(3, 4), F(1, 4)]])
    part = dual_pair_partition(Q)
    assert part.pairs == ((0, 1),) and part.scales == (1,)


def test_no_dual_matching_raises():
    Q = Mechanism([[F(1, 2), F(1, 4), F(1, 4)], [F(1, 4), F(1, 2), F(1, 4)]] )
    with pytest.raises(DesignError):
        dual_pair_partition(Q)
    Q = Mechanism([[F(1, 2), F(1, 4), F(1, 8), F(1, 8)], [F(1, 4), F(1, 4), F(1, 4), F(1, 4)]])
    with pytest.raises(DesignError):
        dual_pair_partition(Q)


def test_partition_idempotent():
    G = complete_block_design(6, 3)
    Q = bd_mechanism(G, 5, 2)
    p1 = dual_pair_partition(Q)
    # permuting columns by the matching and matching again recovers the same pairs
    order = [j for pair in p1.pairs for j in pair]
    Qp = Mechanism([[row[j] for j in order] for row in Q.rows])
    p2 = dual_pair_partition(Qp)
    assert [(order[i], order[j]) for i, j in p2.pairs] == list(p1.pairs)
    assert dual_pair_partition(Q) == p1


def test_resolve_rejects_inconsistent_partition():
    Q = bd_mechanism(complete_block_design(4, 2), 3, 1)
    bad = DualPairPartition(((0, 1), (2, 3), (4, 5)), (F(1, 3),) * 3)
    with pytest.raises(DesignError):
        resolve(Q, bad)


def test_resolution_column_multiset():
    Q = bd_mechanism(complete_block_design(6, 3), 7, 2)
    res = resolve(Q, dual_pair_partition(Q))
    joint = sorted(
        tuple(p * q for q in m.column(z)) for p, m in zip(res.prob_u, res.mechanisms) for z in range(2)
    )
    assert joint == sorted(Q.columns())
