"""Named invariant checks over a parameter grid, used by ``onebit-put verify``.

Each check returns a :class:`Check` with its worst absolute deviation; a check
passes when that deviation is within the check's tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .bounds import lan_lower_bound, put, put_ldp, zeta
from .designs import (
    bd_mechanism,
    complete_block_design,
    dual_pair_partition,
    incidence_matrix,
    resolve,
)
from .mechanisms import PrivacyConstraint, check_one_bit, satisfies, sup_f, sup_f_closed_form
from .schemes import (
    SRScheme,
    build_optimal_sr_scheme,
    calibration_closed_form,
    calibration_numeric,
    expected_estimate_plain,
    expected_estimate_sr,
    to_plain_scheme,
)
from .sim import SimConfig, exact_mse, mc_mse, mse_second_differences, uniform_theta, worst_case_scan

GRIDS = {
    "full": {
        "v": (2, 3, 4, 5, 6, 7, 8),
        "eps": (0.1, 0.25, 0.5, 1.0, 2.0, 4.0),
        "delta": (0.0, 0.05, 0.2, 0.5, 0.9, 1.0),
        "gamma": (0.05, 0.2, 0.4, math.log(2)),
    },
    "small": {
        "v": (2, 3, 4, 5),
        "eps": (0.25, 1.0, 4.0),
        "delta": (0.0, 0.2, 1.0),
        "gamma": (0.2, math.log(2)),
    },
}

ATTAIN_N = 1000
SCAN_SAMPLES = 32


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    worst_deviation: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: worst deviation {self.worst_deviation:.3e}"
        return f"{text} ({self.detail})" if self.detail else text


def grid_constraints(grid: str = "small") -> Iterator[tuple[int, PrivacyConstraint]]:
    """All ``(v, constraint)`` points of a named grid, LDP first, in grid order."""
    g = GRIDS[grid]
    for v in g["v"]:
        for eps in g["eps"]:
            for delta in g["delta"]:
                yield v, PrivacyConstraint.ldp(eps, delta)
        for gamma in g["gamma"]:
            yield v, PrivacyConstraint.ml(gamma)


class _Tracker:
    def __init__(self, name: str, tol: float):
        self.name, self.tol = name, tol
        self.worst = 0.0
        self.where = ""
        self.failed = False

    def add(self, dev: float, where: str, ok: bool | None = None):
        dev = float(dev)
        if math.isnan(dev):
            dev = math.inf
        bad = (dev > self.tol) if ok is None else not ok
        if dev > self.worst or (bad and not self.failed):
            self.worst, self.where = max(dev, self.worst), where
        self.failed |= bad

    def result(self) -> Check:
        detail = f"tol {self.tol:g}" + (f", worst at {self.where}" if self.where else "")
        return Check(self.name, not self.failed, self.worst, detail)


def _label(v, c) -> str:
    return f"v={v} {c}"


def check_sup_f(points) -> Check:
    tr = _Tracker("sup_f brute force vs closed form", 0.0)
    for v, c in points:
        tr.add(abs(sup_f(c, v).value - sup_f_closed_form(c, v)), _label(v, c))
    return tr.result()


def check_formula_agreement(points) -> Check:
    tr = _Tracker("lower bound from sup_f vs PUT formula", 1e-10)
    for v, c in points:
        tr.add(abs(lan_lower_bound(v, sup_f(c, v).value) - put(v, c)), _label(v, c))
    return tr.result()


def check_attainment(schemes) -> Check:
    tr = _Tracker("attainment n*MSE(uniform) = PUT", 1e-10)
    for s in schemes:
        val = ATTAIN_N * exact_mse(s, uniform_theta(s.v, True), ATTAIN_N, rational=True)
        tr.add(abs(float(val) - put(s.v, s.constraint)), repr(s))
    return tr.result()


def check_calibration(schemes) -> Check:
    tr = _Tracker("calibration closed form vs numeric", 1e-12)
    for s in schemes:
        c1, c2 = calibration_numeric(s)
        cf1, cf2 = calibration_closed_form(s.case, s.v, s.c, s.d)
        tr.add(max(abs(c1 - cf1), abs(c2 - cf2), abs(cf1 - s.c1), abs(cf2 - s.c2)), repr(s))
    return tr.result()


def _probe_points(v: int):
    yield uniform_theta(v, True)
    for x in range(v):
        yield tuple(Fraction(int(i == x)) for i in range(v))


def check_unbiasedness(schemes) -> Check:
    tr = _Tracker("unbiasedness of SR and plain estimators", 1e-12)
    for s in schemes:
        plain = to_plain_scheme(s, 2 * s.u_count + 1)
        for theta in _probe_points(s.v):
            for est in (expected_estimate_sr(s, theta), expected_estimate_plain(plain, theta)):
                tr.add(max(abs(e - t) for e, t in zip(est, theta)), repr(s))
    return tr.result()


def check_concavity(schemes) -> Check:
    tr = _Tracker("MSE concave along coordinate lines", 0.0)
    for s in schemes:
        tr.add(max(0.0, float(mse_second_differences(s, ATTAIN_N).max())), repr(s))
    return tr.result()


def check_worst_case(schemes) -> Check:
    tr = _Tracker("worst-case scan picks the uniform distribution", 1e-10)
    for s in schemes:
        theta, _ = worst_case_scan(s, ATTAIN_N, SCAN_SAMPLES, seed=0)
        tr.add(float(np.max(np.abs(theta - 1.0 / s.v))), repr(s))
    return tr.result()


def check_resolution(schemes) -> Check:
    tr = _Tracker("resolution reassembles the design mechanism", 0.0)
    for s in schemes:
        res = s.resolution
        ok = res.reassemble() == s.design_matrix and len(set(res.prob_u)) == 1
        ok &= all(check_one_bit(m) and satisfies(m, s.constraint) for m in res.mechanisms)
        tr.add(0.0 if ok else 1.0, repr(s))
    return tr.result()


def check_threshold_continuity(grid: str = "small") -> Check:
    tr = _Tracker("PUT continuous at the LDP threshold", 1e-6)
    g = GRIDS[grid]
    for v in g["v"]:
        for delta in g["delta"]:
            z = zeta(v, delta)
            if delta == 0 or z - 1e-9 <= 0:
                continue
            mid = put_ldp(v, z, delta)
            for e in (z - 1e-9, z + 1e-9):
                tr.add(abs(put_ldp(v, e, delta) - mid), f"v={v} delta={delta}")
    return tr.result()


def check_plain_sandwich() -> Check:
    tr = _Tracker("plain MSE between SR MSE and n/(n-C) SR MSE", 0.0)
    s = build_optimal_sr_scheme(PrivacyConstraint.ldp(1.0, 0.1), 4)
    C = s.u_count
    theta = uniform_theta(s.v, True)
    for n in (2 * C, 10 * C, 100 * C):
        sr = exact_mse(s, theta, n, "sr", rational=True)
        plain = exact_mse(s, theta, n, "plain", rational=True)
        lo, hi = sr - plain, plain - Fraction(n, n - C) * sr
        tr.add(float(max(lo, hi, 0)), f"n={n}")
    return tr.result()


def check_example1() -> Check:
    """The (4,2) complete design, its design mechanism, dual pairs and resolution, in exact arithmetic."""
    tr = _Tracker("example (4,2) design mechanism and resolution", 0.0)
    A_ref = [
        [1, 1, 1, 0, 0, 0],
        [1, 0, 0, 1, 1, 0],
        [0, 1, 0, 1, 0, 1],
        [0, 0, 1, 0, 1, 1],
    ]
    G = complete_block_design(4, 2)
    tr.add(0.0 if incidence_matrix(G).tolist() == A_ref else 1.0, "incidence matrix")
    for c, d in ((Fraction(3), Fraction(1)), (Fraction(7, 11), Fraction(2, 13))):
        Q = bd_mechanism(G, c, d)
        B = [[c if a else d for a in row] for row in A_ref]
        expect_Q = [[b / (3 * (c + d)) for b in row] for row in B]
        tr.add(0.0 if [list(r) for r in Q.rows] == expect_Q else 1.0, f"Q for c={c}, d={d}")
        part = dual_pair_partition(Q, design=G)
        tr.add(0.0 if part.pairs == ((0, 5), (1, 4), (2, 3)) else 1.0, "dual pairs")
        res = resolve(Q, part)
        for (i, j), mech in zip(part.pairs, res.mechanisms):
            want = [[3 * Q[x, i], 3 * Q[x, j]] for x in range(4)]
            tr.add(0.0 if [list(r) for r in mech.rows] == want else 1.0, f"Q_u for pair {(i, j)}")
        tr.add(0.0 if res.prob_u == (Fraction(1, 3),) * 3 else 1.0, "uniform P_U")
        tr.add(0.0 if res.reassemble() == Q else 1.0, "reassembly")
    return tr.result()


MC_CASES = (
    (4, PrivacyConstraint.ldp(1.0, 0.1)),
    (3, PrivacyConstraint.ldp(1.0, 0.1)),
    (5, PrivacyConstraint.ldp(0.1, 0.5)),
    (2, PrivacyConstraint.ml(math.log(2))),
)


def check_monte_carlo(threads: int | None = None, n: int = 2000, trials: int = 300) -> Check:
    """Simulated mean ``n * MSE`` within 4 standard errors of the exact value, one scheme per case."""
    tr = _Tracker("Monte Carlo agrees with exact MSE (in stderr units)", 4.0)
    for v, c in MC_CASES:
        s = build_optimal_sr_scheme(c, v)
        for mode in ("sr", "plain"):
            cfg = SimConfig(s, tuple(uniform_theta(v)), n, trials, master_seed=20240611, mode=mode)
            rep = mc_mse(cfg, threads=threads)
            exact = n * exact_mse(s, uniform_theta(v), n, mode)
            tr.add(abs(rep.mean_n_mse - exact) / rep.stderr_n_mse, f"{s.case} v={v} {mode}")
    return tr.result()


def run_checks(
    grid: str = "small",
    *,
    example1: bool = False,
    mc: bool = False,
    threads: int | None = None,
    progress: Callable[[Check], None] | None = None,
) -> list[Check]:
    points = list(grid_constraints(grid))
    schemes: list[SRScheme] = [build_optimal_sr_scheme(c, v) for v, c in points]
    jobs = [
        lambda: check_sup_f(points),
        lambda: check_formula_agreement(points),
        lambda: check_attainment(schemes),
        lambda: check_calibration(schemes),
        lambda: check_unbiasedness(schemes),
        lambda: check_concavity(schemes),
        lambda: check_worst_case(schemes),
        lambda: check_resolution(schemes),
        lambda: check_threshold_continuity(grid),
        check_plain_sandwich,
    ]
    if example1:
        jobs.append(check_example1)
    if mc:
        jobs.append(lambda: check_monte_carlo(threads))
    results = []
    for job in jobs:
        res = job()
        if progress is not None:
            progress(res)
        results.append(res)
    return results
