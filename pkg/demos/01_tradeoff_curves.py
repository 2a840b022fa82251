"""Privacy-utility trade-off curves for one-bit frequency estimation.

The first-order constant PUT is the limit of n * (worst-case MSE) for the
best one-bit private scheme. This script tabulates it against the privacy
level and, if matplotlib is installed (``pip install -e .[demos]``), saves
a figure.

    python demos/01_tradeoff_curves.py [--out curves.png]
"""

import argparse
import math

import numpy as np

from onebit_put import put_ldp, put_ml, zeta

parser = argparse.ArgumentParser()
parser.add_argument("--out", default=None, help="save a PNG here (needs matplotlib)")
args = parser.parse_args()

# %% LDP: the curve has two regimes separated by zeta(v, delta).
# Below the threshold a "diagonal" mechanism that reveals x only with
# probability delta is optimal and the PUT no longer depends on eps.
eps_grid = np.linspace(0.05, 4, 80)
for v in (2, 3, 4, 8):
    for delta in (0.0, 0.2):
        z = zeta(v, delta)
        vals = [put_ldp(v, e, delta) for e in eps_grid]
        print(f"v={v} delta={delta}: zeta={z:.4f}  PUT(eps=0.5)={put_ldp(v, 0.5, delta):9.4f}  PUT(eps=4)={vals[-1]:.4f}")

# %% At delta = 1 the constraint is vacuous and every v recovers the
# non-private one-bit constant (v-1)^2 / v.
for v in (2, 5, 8):
    assert math.isclose(put_ldp(v, 1.0, 1.0), (v - 1) ** 2 / v)

# %% Maximal leakage: gamma is capped at log 2, where one bit can carry no
# more information than it already does without privacy.
for v in (2, 4, 8):
    print(f"v={v} ML: " + "  ".join(f"gamma={g:.3f}: {put_ml(v, g):8.3f}" for g in (0.05, 0.2, math.log(2))))

if args.out:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(1, 2, figsize=(10, 4))
    for v in (2, 3, 4, 8):
        ax[0].semilogy(eps_grid, [put_ldp(v, e, 0.2) for e in eps_grid], label=f"v={v}")
        ax[0].axvline(zeta(v, 0.2), ls=":", color="gray")
        gam = np.linspace(0.02, math.log(2), 60)
        ax[1].semilogy(gam, [put_ml(v, g) for g in gam], label=f"v={v}")
    ax[0].set(xlabel="eps", ylabel="n * MSE", title="(eps, 0.2)-LDP")
    ax[1].set(xlabel="gamma", title="gamma-ML")
    ax[0].legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    print(f"saved {args.out}")
