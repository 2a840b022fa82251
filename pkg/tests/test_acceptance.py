"""Acceptance criteria, one recorded PASS/FAIL line per criterion.

Run with pytest (the lines are printed in the terminal summary) or directly
with ``python tests/test_acceptance.py``.
"""

import math
import time
from fractions import Fraction

import numpy as np

from onebit_put.bounds import lan_lower_bound, put, put_ldp, put_ml, zeta
from onebit_put.designs import bd_mechanism, complete_block_design, dual_pair_partition, incidence_matrix, resolve
from onebit_put.mechanisms import PrivacyConstraint, sup_f
from onebit_put.schemes import (
    CASES,
    build_optimal_sr_scheme,
    calibration_closed_form,
    calibration_numeric,
    expected_estimate_plain,
    expected_estimate_sr,
    to_plain_scheme,
)
from onebit_put.sim import SimConfig, exact_mse, mc_mse, mse_second_differences, uniform_theta, worst_case_scan

F = Fraction

V_GRID = (2, 3, 4, 5, 6, 7, 8)
EPS_GRID = (0.1, 0.25, 0.5, 1.0, 2.0, 4.0)
DELTA_GRID = (0.0, 0.05, 0.2, 0.5, 0.9, 1.0)
GAMMA_GRID = (0.05, 0.2, 0.4, math.log(2))

MC_SEED = 20240611

RESULTS: dict[str, str] = {}


def record(key: str, passed: bool, text: str) -> bool:
    RESULTS[key] = f"[{'PASS' if passed else 'FAIL'}] criterion {key}: {text}"
    return passed


def grid_points():
    for v in V_GRID:
        for eps in EPS_GRID:
            for delta in DELTA_GRID:
                yield v, PrivacyConstraint.ldp(eps, delta)
        for gamma in GAMMA_GRID:
            yield v, PrivacyConstraint.ml(gamma)


_SCHEMES = []


def grid_schemes():
    if not _SCHEMES:
        _SCHEMES.extend(build_optimal_sr_scheme(c, v) for v, c in grid_points())
    return _SCHEMES


def test_criterion_1_formula_matches_optimizer():
    start = time.perf_counter()
    worst = 0.0
    for v, c in grid_points():
        worst = max(worst, abs(lan_lower_bound(v, sup_f(c, v).value) - put(v, c)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 5
    assert record("1", ok, f"max |bound(sup F) - PUT| = {worst:.2e} (tol 1e-10), {elapsed:.2f}s (budget 5s)")


def test_criterion_2_attainment():
    start = time.perf_counter()
    _SCHEMES.clear()
    schemes = grid_schemes()
    worst = 0.0
    for s in schemes:
        val = 1000 * exact_mse(s, uniform_theta(s.v, True), 1000, rational=True)
        worst = max(worst, abs(float(val) - put(s.v, s.constraint)))
    elapsed = time.perf_counter() - start
    seen = sorted({s.case for s in schemes})
    ok = worst <= 1e-10 and elapsed < 30 and seen == sorted(CASES)
    assert record(
        "2", ok, f"max |n MSE(uniform) - PUT| = {worst:.2e} (tol 1e-10) over {len(schemes)} schemes, cases {seen}, {elapsed:.2f}s (budget 30s)"
    )


def test_criterion_3_example_design():
    A_ref = [[1, 1, 1, 0, 0, 0], [1, 0, 0, 1, 1, 0], [0, 1, 0, 1, 0, 1], [0, 0, 1, 0, 1, 1]]
    G = complete_block_design(4, 2)
    checks = [incidence_matrix(G).tolist() == A_ref]
    c1 = PrivacyConstraint.ldp(1.0, 0.1)
    e = c1.growth
    for c, d in ((F(3), F(1)), ((e + c1.delta) / (e + 1), (1 - c1.delta) / (e + 1))):
        B = [[c if a else d for a in row] for row in A_ref]
        Q = bd_mechanism(G, c, d)
        checks.append([list(r) for r in Q.rows] == [[b / (3 * (c + d)) for b in row] for row in B])
        part = dual_pair_partition(Q)
        checks.append([(i + 1, j + 1) for i, j in part.pairs] == [(1, 6), (2, 5), (3, 4)])
        res = resolve(Q, part)
        checks.append(res.prob_u == (F(1, 3),) * 3)
        for (i, j), m in zip(part.pairs, res.mechanisms):
            checks.append([list(r) for r in m.rows] == [[3 * Q[x, i], 3 * Q[x, j]] for x in range(4)])
    ok = all(checks)
    assert record("3", ok, f"A, B, Q = B/(3(c+d)), pairs (1,6),(2,5),(3,4), Q_u = 3 C_u: {sum(checks)}/{len(checks)} exact matches")


def test_criterion_4_unbiasedness():
    worst = F(0)
    count = 0
    for s in grid_schemes():
        v = s.v
        plain = to_plain_scheme(s, 2 * s.u_count + 1)
        probes = [tuple(F(int(i == x)) for i in range(v)) for x in range(v)] + [(F(1, v),) * v]
        for theta in probes:
            for est in (expected_estimate_sr(s, theta), expected_estimate_plain(plain, theta)):
                worst = max(worst, max(abs(a - b) for a, b in zip(est, theta)))
                count += 1
    ok = worst <= 1e-12
    assert record("4", ok, f"max |E[estimate] - theta| = {float(worst):.2e} (tol 1e-12) over {count} exact expectations, SR and plain")


def test_criterion_5_concavity_and_worst_case():
    max_second = -math.inf
    worst_theta_dev = 0.0
    for s in grid_schemes():
        max_second = max(max_second, float(mse_second_differences(s, 1000).max()))
        theta, _ = worst_case_scan(s, 1000, samples=32, seed=0)
        worst_theta_dev = max(worst_theta_dev, float(np.max(np.abs(theta - 1 / s.v))))
    ok = max_second <= 0 and worst_theta_dev <= 1e-10
    assert record(
        "5", ok, f"max second difference = {max_second:.3e} (must be <= 0); max |theta* - uniform| = {worst_theta_dev:.1e} (tol 1e-10)"
    )


def test_criterion_6_calibration():
    worst = F(0)
    for s in grid_schemes():
        n1, n2 = calibration_numeric(s)
        f1, f2 = calibration_closed_form(s.case, s.v, s.c, s.d)
        worst = max(worst, abs(n1 - f1), abs(n2 - f2))
    ok = worst <= 1e-12
    assert record("6", ok, f"max |closed form - numeric| = {float(worst):.2e} (tol 1e-12)")


def test_criterion_7_plain_sandwich():
    s = build_optimal_sr_scheme(PrivacyConstraint.ldp(1.0, 0.1), 4)
    C = s.u_count
    ref = F(put(4, s.constraint))
    theta = uniform_theta(4, True)
    ok = True
    gaps, parts = [], []
    for n in (2 * C, 10 * C, 100 * C):
        sr = exact_mse(s, theta, n, "sr", rational=True)
        plain = exact_mse(s, theta, n, "plain", rational=True)
        ok &= sr <= plain <= F(n, n - C) * sr
        gaps.append(abs(n * plain - ref))
        parts.append(f"n={n}: n*plain={float(n * plain):.12g}")
    ok &= all(a >= b for a, b in zip(gaps, gaps[1:]))
    assert record("7", ok, f"SR <= plain <= n/(n-C) SR and |n*plain - PUT| non-increasing; " + ", ".join(parts) + f", PUT={float(ref):.12g}")


MC_CONFIGS = (
    ("v=4 LDP(1, 0.1) sr", 4, PrivacyConstraint.ldp(1.0, 0.1), "sr"),
    ("v=2 ML(log 2) plain", 2, PrivacyConstraint.ml(math.log(2)), "plain"),
)

_MC = {}


def _mc_reports():
    if not _MC:
        for label, v, c, mode in MC_CONFIGS:
            s = build_optimal_sr_scheme(c, v)
            cfg = SimConfig(s, tuple(uniform_theta(v)), 20000, 500, master_seed=MC_SEED, mode=mode)
            _MC[label] = (mc_mse(cfg), put(v, c))
    return _MC


def test_criterion_8a_monte_carlo_mean():
    start = time.perf_counter()
    reps = _mc_reports()
    elapsed = time.perf_counter() - start
    ok = elapsed < 120
    parts = []
    for label, (rep, ref) in reps.items():
        z = abs(rep.mean_n_mse - ref) / rep.stderr_n_mse
        ok &= z <= 3
        parts.append(f"{label}: mean {rep.mean_n_mse:.5g} vs PUT {ref:.5g}, |diff|/stderr = {z:.2f}")
    assert record("8a", ok, "|mean - PUT| <= 3 stderr; " + "; ".join(parts) + f"; {elapsed:.1f}s (budget 120s)")


def test_criterion_8b_monte_carlo_precision():
    reps = _mc_reports()
    ok = True
    parts = []
    for label, (rep, ref) in reps.items():
        ratio = rep.stderr_n_mse / ref
        ok &= ratio <= 0.02
        parts.append(f"{label}: stderr/PUT = {100 * ratio:.2f}%")
    assert record("8b", ok, "stderr/PUT <= 2% at 500 trials; " + "; ".join(parts))


def test_criterion_9_threshold_continuity():
    worst = 0.0
    one_sided = []
    for v in V_GRID:
        for delta in (d for d in DELTA_GRID if d > 0):
            z = zeta(v, delta)
            if z - 1e-9 <= 0:
                # zero threshold: every admissible eps is on the upper side
                one_sided.append((v, delta))
                continue
            mid = put_ldp(v, z, delta)
            for e in (z - 1e-9, z + 1e-9):
                worst = max(worst, abs(put_ldp(v, e, delta) - mid))
    ok = worst <= 1e-6
    note = f"; one-sided (zeta = 0) at (v, delta) in {one_sided}" if one_sided else ""
    assert record("9", ok, f"max |PUT(zeta +- 1e-9) - PUT(zeta)| = {worst:.2e} (tol 1e-6){note}")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                pass
    for line in RESULTS.values():
        print(line)
