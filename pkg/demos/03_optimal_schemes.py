"""The four optimal constructions and the trade-off they attain.

For each regime the optimal one-bit scheme is built, its estimator
calibrated, and its exact n * MSE at the uniform distribution compared with
the closed-form trade-off. Then the scheme is converted to a plain
round-robin scheme that needs no shared randomness.

    python demos/03_optimal_schemes.py
"""

import math

from onebit_put import PrivacyConstraint, build_optimal_sr_scheme, exact_mse, put, zeta
from onebit_put.sim import uniform_theta, worst_case_scan

regimes = [
    ("even v, eps above threshold", 6, PrivacyConstraint.ldp(1.0, 0.1)),
    ("odd v, eps above threshold", 5, PrivacyConstraint.ldp(1.0, 0.1)),
    ("eps below threshold", 5, PrivacyConstraint.ldp(zeta(5, 0.5) / 2, 0.5)),
    ("maximal leakage", 4, PrivacyConstraint.ml(0.3)),
]

# %% Attainment: the exact MSE at the uniform distribution equals the trade-off.
n = 10_000
for label, v, c in regimes:
    s = build_optimal_sr_scheme(c, v)
    val = n * exact_mse(s, uniform_theta(v, True), n, rational=True)
    print(f"{label:30s} case={s.case:9s} C={s.u_count:3d}  c1={float(s.c1):.5f}  "
          f"n*MSE={float(val):.10f}  PUT={put(v, c):.10f}")

# %% The uniform distribution is the worst case: MSE is a concave function
# of theta that is symmetric under relabeling the symbols.
s = build_optimal_sr_scheme(PrivacyConstraint.ldp(1.0, 0.1), 4)
theta, val = worst_case_scan(s, n, samples=200, seed=1)
print("\nworst theta found:", theta, "n*MSE:", round(val, 10))

# %% Without shared randomness, client i uses mechanism i mod C. The cost is
# at most a factor n / (n - C), so the trade-off constant is unchanged.
C = s.u_count
for n in (2 * C, 10 * C, 1000 * C + 1):
    sr = exact_mse(s, uniform_theta(4), n, "sr")
    plain = exact_mse(s, uniform_theta(4), n, "plain")
    print(f"n={n:5d}  plain/SR = {plain / sr:.6f}  bound n/(n-C) = {n / (n - C):.6f}")
print("\nML at gamma = log 2 equals the non-private value:", put(4, PrivacyConstraint.ml(math.log(2))), "= 9/4")
