"""Exact MSE analysis and seeded Monte Carlo runs for one-bit schemes.

``exact_mse`` sums over the finite output alphabet and is the primary
check that a scheme attains its trade-off; ``mc_mse`` simulates clients
and is a sanity layer on top of it.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .schemes import PlainScheme, SRScheme, estimate_plain, estimate_sr, to_plain_scheme

SR = "sr"
PLAIN = "plain"
MODES = (SR, PLAIN)

SIMPLEX_TOL = 1e-12
TIE_TOL = 1e-10


def uniform_theta(v: int, rational: bool = False):
    if rational:
        return tuple([Fraction(1, v)] * v)
    return np.full(v, 1.0 / v)


def _check_theta(theta, v: int) -> np.ndarray:
    arr = np.asarray([float(t) for t in theta], dtype=np.float64)
    if arr.shape != (v,):
        raise ValueError(f"theta must have {v} entries, got {arr.shape}")
    if np.any(arr < 0) or abs(arr.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError("theta must be a probability vector")
    return arr


def project_to_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    y = np.asarray(y, dtype=np.float64)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, y.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(y - css[rho] / (rho + 1), 0.0)


@dataclass(frozen=True, eq=False)
class SimConfig:
    scheme: SRScheme
    theta: tuple
    n: int
    trials: int
    master_seed: int
    mode: str = SR
    keep_trials: bool = False
    project: bool = False

    def __post_init__(self):
        theta = _check_theta(self.theta, self.scheme.v)
        object.__setattr__(self, "theta", tuple(float(t) for t in theta))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.mode == PLAIN and self.n <= self.scheme.u_count:
            raise ValueError(f"n must exceed C: n={self.n}, C={self.scheme.u_count}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    @property
    def plain(self) -> PlainScheme | None:
        return to_plain_scheme(self.scheme, self.n) if self.mode == PLAIN else None

    def describe(self) -> dict:
        return {
            "scheme": self.scheme.describe(),
            "theta": list(self.theta),
            "n": self.n,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "mode": self.mode,
            "project": self.project,
        }


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream per trial, derived from ``(master_seed, trial_index)`` only."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index),))
    return np.random.default_rng(seq)


def _sample_inputs(rng: np.random.Generator, theta: np.ndarray, n: int) -> np.ndarray:
    cdf = np.cumsum(theta)
    cdf[-1] = 1.0
    x = np.searchsorted(cdf, rng.random(n), side="right")
    return np.minimum(x, theta.size - 1)


def _sample_bits(rng: np.random.Generator, scheme: SRScheme, u: np.ndarray, x: np.ndarray) -> np.ndarray:
    p_zero = scheme.channel_float[u, x, 0]
    return (rng.random(u.size) >= p_zero).astype(np.int64)


def run_trial(cfg: SimConfig, trial_index: int) -> float:
    """Squared error ``||theta - estimate||^2`` of one simulated round of ``n`` clients."""
    rng = trial_rng(cfg.master_seed, trial_index)
    s = cfg.scheme
    theta = np.asarray(cfg.theta)
    x = _sample_inputs(rng, theta, cfg.n)
    if cfg.mode == SR:
        u = rng.integers(s.u_count, size=cfg.n)
        z = _sample_bits(rng, s, u, x)
        est = estimate_sr(s, u, z)
    else:
        plain = cfg.plain
        u = plain.assignment
        y = _sample_bits(rng, s, u, x)
        est = estimate_plain(plain, y)
    if cfg.project:
        est = project_to_simplex(est)
    return float(np.sum((theta - est) ** 2))


@dataclass
class SimReport:
    config: dict
    mean_n_mse: float
    stderr_n_mse: float
    per_trial: list | None = None
    elapsed_s: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "config": self.config,
            "mean_n_mse": self.mean_n_mse,
            "stderr_n_mse": self.stderr_n_mse,
        }
        out.update(self.extra)
        if self.per_trial is not None:
            out["per_trial"] = self.per_trial
        out["elapsed_s"] = self.elapsed_s
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def mc_mse(cfg: SimConfig, threads: int | None = None) -> SimReport:
    """Mean and standard error of ``n * mse`` over ``cfg.trials`` seeded trials.

    Each trial owns its RNG stream, and results are combined in trial order,
    so the report does not depend on ``threads``.
    """
    if cfg.trials < 2:
        raise ValueError("need at least two trials for a standard error")
    start = time.perf_counter()
    indices = range(cfg.trials)
    if threads == 1:
        mses = [run_trial(cfg, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            mses = list(pool.map(lambda i: run_trial(cfg, i), indices))
    n_mse = np.asarray(mses) * cfg.n
    mean = math.fsum(n_mse) / cfg.trials
    stderr = float(np.std(n_mse, ddof=1)) / math.sqrt(cfg.trials)
    per_trial = [float(m) for m in mses] if cfg.keep_trials else None
    return SimReport(cfg.describe(), mean, stderr, per_trial, time.perf_counter() - start)


def _eta_variances(channel, eta, theta):
    """Per-u output probabilities and per-(u, x) conditional variances of eta, plus the pooled ones."""
    # p[u, z] = sum_x theta_x Q_u(z|x)
    p = np.einsum("x,uxz->uz", theta, channel)
    cond_mean = np.einsum("uz,uzx->ux", p, eta)
    cond_var = np.einsum("uz,uzx->ux", p, (eta - cond_mean[:, None, :]) ** 2)
    C = channel.shape[0]
    pooled_mean = cond_mean.sum(axis=0) / C
    pooled_var = np.einsum("uz,uzx->x", p, (eta - pooled_mean[None, None, :]) ** 2) / C
    return cond_var, pooled_var


def exact_mse(scheme: SRScheme, theta, n: int, mode: str = SR, *, rational: bool = False):
    """Exact expected squared error for ``n`` clients with data drawn from ``theta``.

    SR mode: ``sum_x Var(eta_x(U, Z)) / (n c1^2)``. Plain mode:
    ``sum_x sum_j Var(eta_x(j, Y_j)) / (c1^2 floor(n/C) C^2)``. With
    ``rational=True`` everything is computed in Fractions and a Fraction is
    returned.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    channel, eta = scheme.tables(rational)
    if rational:
        _check_theta(theta, scheme.v)
        th = np.array([Fraction(t) for t in theta], dtype=object)
        exact_input = all(isinstance(t, (int, Fraction)) for t in theta)
        if exact_input and sum(th) != 1:
            raise ValueError("theta must sum to exactly 1")
        c1 = scheme.c1
    else:
        th = _check_theta(theta, scheme.v)
        c1 = float(scheme.c1)
    cond_var, pooled_var = _eta_variances(channel, eta, th)
    C = scheme.u_count
    if mode == SR:
        return pooled_var.sum() / (n * c1 * c1)
    if n < C:
        raise ValueError(f"n must be at least C: n={n}, C={C}")
    return cond_var.sum() / (c1 * c1 * (n // C) * C * C)


def _probe_thetas(v: int, samples: int, seed: int) -> list[np.ndarray]:
    probes = [uniform_theta(v)]
    eye = np.eye(v)
    probes.extend(eye)
    probes.extend((eye[i] + eye[j]) / 2 for i, j in itertools.combinations(range(v), 2))
    if samples:
        rng = np.random.default_rng(seed)
        probes.extend(rng.dirichlet(np.ones(v), size=samples))
    return probes


def worst_case_scan(scheme: SRScheme, n: int, samples: int, seed: int, mode: str = SR):
    """Largest ``n * exact_mse`` over a fixed probe set plus random simplex points.

    The probe set is the uniform vector, all vertices and all edge midpoints.
    A probe replaces the incumbent only if it beats it by more than a relative
    ``1e-10``; the uniform vector is probed first.
    """
    if samples < 0:
        raise ValueError("samples must be non-negative")
    best_theta, best = None, -math.inf
    for theta in _probe_thetas(scheme.v, samples, seed):
        val = n * exact_mse(scheme, theta, n, mode)
        if val > best + TIE_TOL * max(1.0, abs(best) if math.isfinite(best) else 1.0):
            best_theta, best = np.asarray(theta, dtype=np.float64), val
    return best_theta, best


def _toward_vertex(base, x: int, t):
    """Point with ``theta_x = t`` and the remaining mass spread in proportion to ``base``."""
    rest = [b for i, b in enumerate(base) if i != x]
    total = sum(rest)
    out = []
    for i, b in enumerate(base):
        if i == x:
            out.append(t)
        elif total == 0:
            out.append((1 - t) / (len(base) - 1))
        else:
            out.append((1 - t) * b / total)
    return out


def mse_second_differences(scheme: SRScheme, n: int, base=None, mode: str = SR) -> np.ndarray:
    """``f(0) - 2 f(1/2) + f(1)`` of ``n * exact_mse`` along each coordinate line through ``base``.

    Line ``x`` moves ``theta_x`` from 0 to 1 with the other coordinates kept
    in proportion to ``base`` (uniform by default). Non-positive values mean
    the MSE is concave along that line.
    """
    v = scheme.v
    base = list(uniform_theta(v)) if base is None else list(base)
    out = np.empty(v)
    for x in range(v):
        f0, fh, f1 = (
            n * exact_mse(scheme, _toward_vertex(base, x, t), n, mode) for t in (0.0, 0.5, 1.0)
        )
        out[x] = f0 - 2 * fh + f1
    return out


def eta_variance_quadratic(scheme: SRScheme, x: int) -> tuple[Fraction, Fraction, Fraction]:
    """Exact coefficients ``(a2, a1, a0)`` of ``Var(eta_x(W))`` as a polynomial in ``theta_x``.

    The other coordinates share the remaining mass equally. The polynomial is
    fitted through ``theta_x in {0, 1/2, 1}``; it is exactly quadratic.
    """
    channel, eta = scheme.tables(rational=True)
    base = [Fraction(1, scheme.v)] * scheme.v
    vals = []
    for t in (Fraction(0), Fraction(1, 2), Fraction(1)):
        th = np.array(_toward_vertex(base, x, t), dtype=object)
        _, pooled = _eta_variances(channel, eta, th)
        vals.append(pooled[x])
    f0, fh, f1 = vals
    a2 = 2 * (f0 - 2 * fh + f1)
    a1 = f1 - f0 - a2
    return a2, a1, f0
