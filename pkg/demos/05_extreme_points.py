"""Which one-bit mechanism maximizes the information functional F?

The trade-off equals (v-1)^2 / (v (F* - 1)) where F* is the largest F over
private one-bit mechanisms. F is convex, so it suffices to scan the extreme
columns: two-level columns {a, 1-a}^v, single-level columns {a, 0}^v and the
zero column. This script brute-forces every family and every count t, and
shows the regime switch at the threshold zeta(v, delta).

    python demos/05_extreme_points.py
"""

from onebit_put import PrivacyConstraint, lan_lower_bound, put, sup_f, zeta
from onebit_put.mechanisms import extreme_column_families

v, delta = 5, 0.3
z = zeta(v, delta)
print(f"v={v}, delta={delta}: threshold zeta = {z:.5f}")

# %% F of every family member at three privacy levels around the threshold.
for eps in (z / 2, z, 2 * z):
    c = PrivacyConstraint.ldp(eps, delta)
    print(f"\neps = {eps:.4f}")
    for fam in extreme_column_families(c, v):
        vals = ", ".join(f"t={t}: {float(fam.f(t, v)):.5f}" for t in fam.t_range)
        print(f"  {fam.kind:11s} {vals}")
    best = sup_f(c, v)
    print(f"  max F = {float(best.value):.6f} by {best.family.kind} with t={best.t}; "
          f"bound {lan_lower_bound(v, best.value):.6f} vs PUT {put(v, c):.6f}")
