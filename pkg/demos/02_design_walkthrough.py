"""From a block design to a one-bit mechanism with shared randomness.

Walks through the (4,2) complete block design: incidence matrix, the
(c,d)-valued design mechanism, its dual column pairs, and the resolution
into three one-bit mechanisms selected by a uniform shared random index.

    python demos/02_design_walkthrough.py
"""

from fractions import Fraction

from onebit_put import (
    PrivacyConstraint,
    bd_mechanism,
    check_ldp,
    complete_block_design,
    dual_pair_partition,
    incidence_matrix,
    resolve,
    verify_design,
)

# %% All 2-subsets of {1,2,3,4} as edges: every vertex lies in r = 3 edges
# and every pair of vertices shares lambda = 1 edge.
G = complete_block_design(4, 2)
print("design parameters (v, b, r, k, lambda):", verify_design(G).as_tuple())
print(incidence_matrix(G))

# %% Map 1 -> c and 0 -> d and normalize the rows. With c, d chosen from
# (eps, delta) every column ratio is within the LDP budget.
con = PrivacyConstraint.ldp(1.0, 0.1)
e = con.growth
c, d = (e + con.delta) / (e + 1), (1 - con.delta) / (e + 1)
Q = bd_mechanism(G, c, d)
print("\nQ (floats):")
print(Q.to_float().round(4))
print("Q satisfies LDP:", check_ldp(Q, con.epsilon, con.delta, exp_eps=e))

# %% Column j and its complement edge sum to a constant vector, so each pair
# is a scaled one-bit mechanism. Output indices below are 1-based.
part = dual_pair_partition(Q, design=G)
print("\ndual pairs:", [(i + 1, j + 1) for i, j in part.pairs], "scale:", part.pair_scale)

# %% Resolution: draw U uniformly from three pairs, then release one bit with
# Q_U = 3 * (pair U). Reassembling P_U * Q_U gives back Q exactly.
res = resolve(Q, part)
for u, m in enumerate(res.mechanisms, 1):
    print(f"Q_{u} =", [[str(q) if q.denominator < 100 else f"{float(q):.4f}" for q in row] for row in m.rows])
assert res.reassemble() == Q
assert all(q == Fraction(1, 3) for q in res.prob_u)
print("\nreassembled mechanism equals Q exactly")
