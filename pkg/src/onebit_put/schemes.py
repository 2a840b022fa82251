"""Optimal one-bit schemes with shared randomness, and their plain round-robin versions.

A scheme pairs a resolved mechanism (uniform ``U`` over ``C`` one-bit
mechanisms) with the unbiased estimator

    theta_hat = (mean of eta(u_i, z_i) - c2) / c1,

where ``eta(w)`` is the vector of normalized likelihoods of output ``w`` and
``E[eta(W)] = c1 * theta + c2``.

Indices are 0-based throughout: ``u`` in ``range(C)`` and ``z`` in ``{0, 1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .bounds import zeta
from .designs import (
    DEFAULT_MAX_EDGES,
    BlockDesign,
    DualPairPartition,
    Resolution,
    bd_mechanism,
    check_partition,
    complete_block_design,
    concat_designs,
    dual_pair_partition,
    resolve,
)
from .errors import ConstructionError, DegenerateMechanismError, DomainError, MechanismError
from .mechanisms import Mechanism, PrivacyConstraint, check_one_bit, satisfies

EVEN_CBD = "even_cbd"
ODD_RPBD = "odd_rpbd"
DIAG_LDP = "diag_ldp"
DIAG_ML = "diag_ml"
CASES = (EVEN_CBD, ODD_RPBD, DIAG_LDP, DIAG_ML)

AFFINE_TOL = 1e-9


def diagonal_mechanism(v: int, c) -> Mechanism:
    """``(1/v) [c I | 1 - c I]``: a v x 2v matrix."""
    c = Fraction(c)
    if not 0 < c <= 1:
        raise DomainError(f"diagonal level must lie in (0, 1], got {c}")
    inv = Fraction(1, v)
    rows = []
    for x in range(v):
        left = [c * inv if y == x else Fraction(0) for y in range(v)]
        right = [(1 - c) * inv if y == x else inv for y in range(v)]
        rows.append(left + right)
    return Mechanism(rows)


def eta(Q: Mechanism, w: int) -> tuple[Fraction, ...]:
    """Normalized likelihoods ``Q(w|x) / sum_x' Q(w|x')`` of output column ``w``."""
    col = Q.column(w)
    total = sum(col, Fraction(0))
    if total == 0:
        raise MechanismError(f"column {w} is identically zero; eta is undefined")
    return tuple(q / total for q in col)


def calibration_closed_form(case: str, v: int, c, d=None) -> tuple:
    """Affine constants ``(c1, c2)`` with ``E[eta(W)] = c1 theta + c2`` for a construction.

    ``c, d`` are the design values for the block-design cases and ``c`` is
    the diagonal level (``delta`` or ``e^gamma - 1``) for the diagonal cases.
    Rational inputs give rational outputs.
    """
    if case == EVEN_CBD:
        if c == d:
            raise DegenerateMechanismError("c == d gives c1 = 0")
        s2 = (c + d) ** 2
        c1 = (c - d) ** 2 / ((v - 1) * s2)
        c2 = (v * s2 - 2 * (c * c + d * d)) / (v * (v - 1) * s2)
        return c1, c2
    if case == ODD_RPBD:
        if c == d:
            raise DegenerateMechanismError("c == d gives c1 = 0")
        if v % 2 == 0:
            raise DomainError("odd-v construction needs odd v")
        a = (v - 1) // 2
        big = (a + 1) * c + a * d
        small = a * c + (a + 1) * d
        c1 = (c - d) ** 2 * (a + 1) / (2 * big * small)
        c2 = ((2 * a + 1) * ((c + d) ** 2 * a + 2 * c * d) - (c - d) ** 2) / (
            2 * (2 * a + 1) * big * small
        )
        return c1, c2
    if case in (DIAG_LDP, DIAG_ML):
        if not c > 0:
            raise DegenerateMechanismError("diagonal level must be positive")
        return c / (v - c), (v - 2 * c) / (v * (v - c))
    raise ValueError(f"unknown case {case!r}")


def _joint_columns(source) -> tuple[int, list[tuple[Fraction, ...]]]:
    if isinstance(source, SRScheme):
        source = source.resolution
    if isinstance(source, Resolution):
        cols = []
        for p_u, mech in zip(source.prob_u, source.mechanisms):
            for z in range(mech.num_outputs):
                cols.append(tuple(p_u * q for q in mech.column(z)))
        return source.mechanisms[0].num_inputs, cols
    if isinstance(source, Mechanism):
        return source.num_inputs, source.columns()
    raise TypeError(f"cannot calibrate a {type(source).__name__}")


def calibration_numeric(source) -> tuple[Fraction, Fraction]:
    """Solve ``E[eta(W)] = c1 theta + c2`` by exact summation at every basis vector.

    ``source`` is an :class:`SRScheme`, a :class:`~onebit_put.designs.Resolution`
    or a plain :class:`~onebit_put.mechanisms.Mechanism`. Raises if the
    relation is not affine or if ``c1 == 0``.
    """
    v, cols = _joint_columns(source)
    live = []
    for col in cols:
        total = sum(col, Fraction(0))
        if total:
            live.append((col, tuple(q / total for q in col)))

    def mean_eta(x):
        return [sum((col[x] * et[y] for col, et in live), Fraction(0)) for y in range(v)]

    first = mean_eta(0)
    c2 = first[1]
    c1 = first[0] - c2
    if c1 == 0:
        raise DegenerateMechanismError("calibration slope c1 is zero; estimator undefined")
    for x in range(v):
        m = mean_eta(x)
        for y in range(v):
            want = c1 + c2 if y == x else c2
            if abs(float(m[y] - want)) > AFFINE_TOL:
                raise ConstructionError(
                    f"E[eta_{y}] at theta=e_{x} is {float(m[y])!r}, affine fit predicts {float(want)!r}"
                )
    return c1, c2


@dataclass(frozen=True, eq=False)
class SRScheme:
    """A calibrated shared-randomness scheme.

    ``design_matrix`` is the pre-designed v x 2C matrix; ``resolution`` splits
    it into ``C`` one-bit mechanisms under uniform ``P_U``.
    """

    v: int
    constraint: PrivacyConstraint
    case: str
    c: Fraction
    d: Fraction | None
    design_matrix: Mechanism
    resolution: Resolution
    c1: Fraction
    c2: Fraction
    design: BlockDesign | None = None

    @property
    def u_count(self) -> int:
        return self.resolution.u_count

    @property
    def prob_u(self) -> tuple[Fraction, ...]:
        return self.resolution.prob_u

    @property
    def per_u_mechanisms(self) -> tuple[Mechanism, ...]:
        return self.resolution.mechanisms

    @cached_property
    def eta_table(self) -> tuple[tuple[tuple[Fraction, ...], ...], ...]:
        """``eta_table[u][z]``; ``P_U(u)`` cancels, so this is per-u normalization."""
        return tuple(
            tuple(eta(mech, z) for z in range(mech.num_outputs)) for mech in self.per_u_mechanisms
        )

    @cached_property
    def eta_float(self) -> np.ndarray:
        """Float copy of the eta table, shape ``(C, 2, v)``."""
        arr = np.array([[[float(e) for e in vec] for vec in row] for row in self.eta_table])
        arr.setflags(write=False)
        return arr

    @cached_property
    def channel_float(self) -> np.ndarray:
        """``Q_u(z|x)`` as floats, shape ``(C, v, 2)``."""
        arr = np.stack([m.to_float() for m in self.per_u_mechanisms])
        arr.setflags(write=False)
        return arr

    def tables(self, rational: bool = False):
        """``(channel, eta)`` arrays, float64 or exact object arrays of Fractions."""
        if not rational:
            return self.channel_float, self.eta_float
        chan = np.empty((self.u_count, self.v, 2), dtype=object)
        for u, mech in enumerate(self.per_u_mechanisms):
            for x in range(self.v):
                for z in range(2):
                    chan[u, x, z] = mech[x, z]
        et = np.empty((self.u_count, 2, self.v), dtype=object)
        for u, row in enumerate(self.eta_table):
            for z, vec in enumerate(row):
                et[u, z, :] = list(vec)
        return chan, et

    def describe(self) -> dict:
        return {
            "case": self.case,
            "v": self.v,
            "constraint": self.constraint.describe(),
            "C": self.u_count,
            "c1": float(self.c1),
            "c2": float(self.c2),
            "c1_exact": str(self.c1),
            "c2_exact": str(self.c2),
        }

    def __repr__(self):
        return f"SRScheme({self.case}, v={self.v}, C={self.u_count}, {self.constraint})"


def _diagonal_partition(Q: Mechanism, v: int) -> DualPairPartition:
    pairs = tuple((i, i + v) for i in range(v))
    part = DualPairPartition(pairs, tuple(Q[0, i] + Q[0, j] for i, j in pairs))
    check_partition(Q, part)
    return part


def select_case(c: PrivacyConstraint, v: int) -> str:
    if not c.is_ldp:
        return DIAG_ML
    if c.epsilon >= zeta(v, float(c.delta)):
        return EVEN_CBD if v % 2 == 0 else ODD_RPBD
    return DIAG_LDP


def build_optimal_sr_scheme(
    c: PrivacyConstraint, v: int, *, max_edges: int = DEFAULT_MAX_EDGES
) -> SRScheme:
    """Construct, resolve and calibrate the optimal one-bit scheme for ``c`` and ``v``.

    LDP with ``eps >= zeta(v, delta)`` uses the (c,d)-valued complete design
    with ``k = v/2`` (even v) or the union of the ``alpha`` and ``alpha + 1``
    complete designs (``v = 2 alpha + 1``); below the threshold, and for ML,
    the diagonal matrix ``(1/v)[c I | 1 - c I]`` is used.
    """
    if int(v) != v or v < 2:
        raise DomainError(f"v must be an integer >= 2, got {v!r}")
    case = select_case(c, v)
    design = None
    if case in (EVEN_CBD, ODD_RPBD):
        e, delta = c.growth, c.delta
        hi = (e + delta) / (e + 1)
        lo = (1 - delta) / (e + 1)
        if case == EVEN_CBD:
            design = complete_block_design(v, v // 2, max_edges=max_edges)
        else:
            alpha = (v - 1) // 2
            design = concat_designs(
                complete_block_design(v, alpha, max_edges=max_edges),
                complete_block_design(v, alpha + 1, max_edges=max_edges),
            )
        Q = bd_mechanism(design, hi, lo)
        part = dual_pair_partition(Q, design=design)
        level, low = hi, lo
    else:
        level = c.delta if case == DIAG_LDP else c.ml_level
        low = None
        Q = diagonal_mechanism(v, level)
        part = _diagonal_partition(Q, v)

    res = resolve(Q, part)
    for u, mech in enumerate(res.mechanisms):
        if not check_one_bit(mech) or not satisfies(mech, c):
            raise ConstructionError(f"per-u mechanism {u} violates {c}")
    c1, c2 = calibration_closed_form(case, v, level, low)
    return SRScheme(v, c, case, level, low, Q, res, c1, c2, design)


def _observation_counts(C: int, u, z) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    if u.shape != z.shape or u.ndim != 1:
        raise ValueError("u and z must be 1-d sequences of equal length")
    if u.size == 0:
        raise ValueError("need at least one observation")
    if u.min() < 0 or u.max() >= C:
        raise ValueError(f"shared randomness index outside range({C})")
    if z.min() < 0 or z.max() > 1:
        raise ValueError("one-bit outputs must be 0 or 1")
    return np.bincount(u * 2 + z, minlength=2 * C)


def _debias(s: SRScheme, mean_eta: np.ndarray) -> np.ndarray:
    return (mean_eta - float(s.c2)) / float(s.c1)


def estimate_sr(s: SRScheme, u_list: Sequence[int], z_list: Sequence[int]) -> np.ndarray:
    """Unbiased estimate from shared-randomness indices and reported bits.

    The estimate is not projected onto the simplex and may have negative
    entries; its entries sum to 1.
    """
    counts = _observation_counts(s.u_count, u_list, z_list)
    mean = counts @ s.eta_float.reshape(-1, s.v) / counts.sum()
    return _debias(s, mean)


def expected_estimate_sr(s: SRScheme, theta: Sequence) -> tuple[Fraction, ...]:
    """Exact expectation of :func:`estimate_sr` for data drawn from ``theta``."""
    theta = [Fraction(t) for t in theta]
    mean = [Fraction(0)] * s.v
    for p_u, mech, row in zip(s.prob_u, s.per_u_mechanisms, s.eta_table):
        for z, vec in enumerate(row):
            p = p_u * sum((theta[x] * mech[x, z] for x in range(s.v)), Fraction(0))
            for y in range(s.v):
                mean[y] += p * vec[y]
    return tuple((m - s.c2) / s.c1 for m in mean)


@dataclass(frozen=True, eq=False)
class PlainScheme:
    """Round-robin scheme without shared randomness: client ``i`` uses mechanism ``i mod C``."""

    base: SRScheme
    n: int

    @property
    def v(self) -> int:
        return self.base.v

    @property
    def constraint(self) -> PrivacyConstraint:
        return self.base.constraint

    @property
    def u_count(self) -> int:
        return self.base.u_count

    @property
    def blocks(self) -> int:
        return self.n // self.u_count

    @property
    def assignment(self) -> np.ndarray:
        return np.arange(self.n) % self.u_count

    @property
    def mechanisms(self) -> list[Mechanism]:
        mechs = self.base.per_u_mechanisms
        return [mechs[u] for u in self.assignment]


def to_plain_scheme(s: SRScheme, n: int) -> PlainScheme:
    if n <= s.u_count:
        raise ValueError(f"n must exceed C: n={n}, C={s.u_count}")
    return PlainScheme(s, int(n))


def estimate_plain(p: PlainScheme, y_list: Sequence[int]) -> np.ndarray:
    """Block-average estimator over the first ``floor(n/C) * C`` clients; the remainder is ignored."""
    y = np.asarray(y_list, dtype=np.int64)
    if y.shape != (p.n,):
        raise ValueError(f"expected {p.n} reports, got {y.shape[0] if y.ndim else 0}")
    if p.n < p.u_count:
        raise ValueError(f"n must be at least C: n={p.n}, C={p.u_count}")
    used = p.blocks * p.u_count
    counts = _observation_counts(p.u_count, p.assignment[:used], y[:used])
    mean = counts @ p.base.eta_float.reshape(-1, p.v) / used
    return _debias(p.base, mean)


def expected_estimate_plain(p: PlainScheme, theta: Sequence) -> tuple[Fraction, ...]:
    """Exact expectation of :func:`estimate_plain`, summing client by client over one block."""
    s = p.base
    theta = [Fraction(t) for t in theta]
    C = s.u_count
    mean = [Fraction(0)] * s.v
    for j, (mech, row) in enumerate(zip(s.per_u_mechanisms, s.eta_table)):
        for z, vec in enumerate(row):
            pz = sum((theta[x] * mech[x, z] for x in range(s.v)), Fraction(0))
            for y in range(s.v):
                mean[y] += pz * vec[y] / C
    return tuple((m - s.c2) / s.c1 for m in mean)
