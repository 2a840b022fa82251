"""Simulated clients versus the exact MSE.

Runs seeded Monte Carlo trials for two schemes, compares the mean n * MSE
with the exact value, and shows how the standard error shrinks with the
number of trials. Each trial's random stream depends only on the master
seed and the trial index, so results do not depend on the thread count.

    python demos/04_monte_carlo.py
"""

import math

from onebit_put import PrivacyConstraint, SimConfig, build_optimal_sr_scheme, exact_mse, mc_mse, put
from onebit_put.sim import uniform_theta

n = 20_000
setups = [
    ("v=4, (1, 0.1)-LDP, shared randomness", 4, PrivacyConstraint.ldp(1.0, 0.1), "sr"),
    ("v=2, log2-ML, round robin", 2, PrivacyConstraint.ml(math.log(2)), "plain"),
]

# %% Agreement with the exact value, in units of the standard error.
for label, v, c, mode in setups:
    s = build_optimal_sr_scheme(c, v)
    rep = mc_mse(SimConfig(s, tuple(uniform_theta(v)), n, 500, master_seed=7, mode=mode))
    exact = n * exact_mse(s, uniform_theta(v), n, mode)
    print(f"{label}: mean {rep.mean_n_mse:.4f} +- {rep.stderr_n_mse:.4f}, exact {exact:.4f}, PUT {put(v, c):.4f}, "
          f"z = {(rep.mean_n_mse - exact) / rep.stderr_n_mse:+.2f}")

# %% Precision. n * squared error is close to a sum of v - 1 equal-weight
# chi-square(1) terms at the uniform distribution, so its relative standard
# deviation is sqrt(2 / (v - 1)) and the relative standard error after T
# trials is sqrt(2 / ((v - 1) T)), independent of n.
v, c = 4, PrivacyConstraint.ldp(1.0, 0.1)
s = build_optimal_sr_scheme(c, v)
for trials in (125, 500, 2000):
    rep = mc_mse(SimConfig(s, tuple(uniform_theta(v)), 2000, trials, master_seed=3))
    print(f"trials={trials:5d}  stderr/PUT = {100 * rep.stderr_n_mse / put(v, c):.2f}%  "
          f"predicted {100 * math.sqrt(2 / ((v - 1) * trials)):.2f}%")
