"""Stochastic matrices, privacy constraints and the one-bit extreme points.

Mechanisms are stored with exact :class:`~fractions.Fraction` entries so that
constraint checks and dual-pair detection never depend on a tolerance. Float
views are produced on demand for sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, MechanismError

FLOAT_TOL = 1e-12

LDP = "ldp"
ML = "ml"

TWO_LEVEL = "two_level"
LEVEL_ZERO = "level_zero"
ZERO_COLUMN = "zero_column"
FAMILY_ORDER = (TWO_LEVEL, LEVEL_ZERO, ZERO_COLUMN)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise MechanismError(f"non-finite entry {x!r}")
        return Fraction(float(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, np.integer):
        return Fraction(int(x))
    raise MechanismError(f"unsupported entry type {type(x).__name__}")


def _is_exact(x) -> bool:
    return isinstance(x, (int, Rational, str, np.integer)) and not isinstance(x, bool)


class Mechanism:
    """Row-stochastic matrix ``Q[x][y] = Q(y|x)`` with rational entries.

    Entries given as ints, Fractions or ``"p/q"`` strings are checked exactly:
    every row must sum to 1. If any entry is a float the matrix is marked
    inexact and row sums are checked to within ``1e-12``.

    Args:
        entries: ``v`` rows of ``m`` probabilities.
        allow_zero_columns: permit outputs that no input can produce.
    """

    __slots__ = ("_rows", "_exact", "_float", "_allow_zero")

    def __init__(self, entries: Iterable[Sequence], *, allow_zero_columns: bool = False):
        raw = [list(row) for row in entries]
        if len(raw) < 1:
            raise MechanismError("mechanism needs at least one input row")
        width = len(raw[0])
        if width < 1:
            raise MechanismError("mechanism needs at least one output column")
        if any(len(row) != width for row in raw):
            raise MechanismError("ragged matrix: rows have different lengths")

        exact = all(_is_exact(x) for row in raw for x in row)
        rows = tuple(tuple(_as_fraction(x) for x in row) for row in raw)

        for i, row in enumerate(rows):
            for j, q in enumerate(row):
                if q < 0 or q > 1:
                    raise MechanismError(f"entry ({i}, {j}) = {q} outside [0, 1]")
            total = sum(row, Fraction(0))
            if exact:
                if total != 1:
                    raise MechanismError(f"row {i} sums to {total}, not 1")
            elif abs(float(total) - 1.0) > FLOAT_TOL:
                raise MechanismError(f"row {i} sums to {float(total)!r}, not 1")

        if not allow_zero_columns:
            for j in range(width):
                if all(row[j] == 0 for row in rows):
                    raise MechanismError(f"output column {j} is identically zero")

        self._rows = rows
        self._exact = exact
        self._allow_zero = allow_zero_columns
        self._float = None

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], **kwargs) -> "Mechanism":
        v = len(columns[0])
        return cls([[col[x] for col in columns] for x in range(v)], **kwargs)

    @property
    def num_inputs(self) -> int:
        return len(self._rows)

    @property
    def num_outputs(self) -> int:
        return len(self._rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.num_inputs, self.num_outputs

    @property
    def exact(self) -> bool:
        return self._exact

    @property
    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self._rows)

    def columns(self) -> list[tuple[Fraction, ...]]:
        return [self.column(j) for j in range(self.num_outputs)]

    def zero_columns(self) -> list[int]:
        return [j for j in range(self.num_outputs) if all(row[j] == 0 for row in self._rows)]

    def to_float(self) -> np.ndarray:
        """Read-only float64 copy of the entries."""
        if self._float is None:
            arr = np.array([[float(q) for q in row] for row in self._rows], dtype=np.float64)
            arr.setflags(write=False)
            self._float = arr
        return self._float

    def __getitem__(self, idx):
        x, y = idx
        return self._rows[x][y]

    def __eq__(self, other):
        if not isinstance(other, Mechanism):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self):
        return f"Mechanism({self.num_inputs}x{self.num_outputs}, exact={self._exact})"


@dataclass(frozen=True)
class PrivacyConstraint:
    """Either an (epsilon, delta)-LDP or a gamma-ML constraint.

    ``growth`` is the exact rational used for ``e^epsilon`` (LDP) or
    ``e^gamma`` (ML) by every construction and check, so that schemes built
    from a constraint satisfy it without rounding slack. Use :meth:`ldp` and
    :meth:`ml` rather than the raw constructor.
    """

    kind: str
    epsilon: float | None
    delta: Fraction
    gamma: float | None
    growth: Fraction
    exact_growth: bool = False

    @classmethod
    def ldp(cls, epsilon: float | None = None, delta=0, *, exp_epsilon=None) -> "PrivacyConstraint":
        """(epsilon, delta)-LDP; pass ``exp_epsilon`` to fix e^epsilon exactly."""
        if exp_epsilon is not None:
            growth = Fraction(exp_epsilon)
            if growth <= 1:
                raise DomainError("exp_epsilon must exceed 1")
            epsilon = math.log(growth)
            exact = True
        else:
            epsilon = float(epsilon)
            if not epsilon > 0 or not math.isfinite(epsilon):
                raise DomainError(f"epsilon must be positive and finite, got {epsilon!r}")
            # expm1 keeps e^eps - 1 accurate for small eps
            growth = 1 + Fraction(math.expm1(epsilon))
            exact = False
        delta = Fraction(delta)
        if not 0 <= delta <= 1:
            raise DomainError(f"delta must lie in [0, 1], got {float(delta)!r}")
        return cls(LDP, epsilon, delta, None, growth, exact)

    @classmethod
    def ml(cls, gamma: float | None = None, *, exp_gamma=None) -> "PrivacyConstraint":
        """gamma-ML with ``0 < gamma <= log 2``; ``exp_gamma`` fixes e^gamma exactly."""
        if exp_gamma is not None:
            growth = Fraction(exp_gamma)
            if not 1 < growth <= 2:
                raise DomainError("exp_gamma must lie in (1, 2]")
            gamma = math.log(growth)
            exact = True
        else:
            gamma = float(gamma)
            if not 0 < gamma <= math.log(2):
                raise DomainError(
                    f"gamma must lie in (0, log 2], got {gamma!r}; larger values are vacuous for one bit"
                )
            growth = 1 + min(Fraction(1), Fraction(math.expm1(gamma)))
            exact = False
        return cls(ML, None, Fraction(0), gamma, growth, exact)

    @property
    def is_ldp(self) -> bool:
        return self.kind == LDP

    @property
    def ml_level(self) -> Fraction:
        """``e^gamma - 1``, the nonzero value of an extreme ML column."""
        if self.kind != ML:
            raise AttributeError("ml_level is only defined for ML constraints")
        return self.growth - 1

    def describe(self) -> dict:
        if self.kind == LDP:
            return {"kind": LDP, "epsilon": self.epsilon, "delta": float(self.delta)}
        return {"kind": ML, "gamma": self.gamma}

    def __str__(self):
        if self.kind == LDP:
            return f"LDP(eps={self.epsilon:.6g}, delta={float(self.delta):.6g})"
        return f"ML(gamma={self.gamma:.6g})"


def _slack_ok(slack: Fraction, tol: float) -> bool:
    return slack >= 0 if tol == 0 else float(slack) >= -tol


def check_ldp(Q: Mechanism, eps: float, delta, *, exp_eps=None, tol: float | None = None) -> bool:
    """True iff ``Q(y|x) <= e^eps Q(y|x') + delta`` for every y, x, x'.

    The comparison is done in rational arithmetic. Since ``e^eps`` is
    generally irrational the default slack tolerance is 1e-12; it drops to 0
    when ``exp_eps`` is supplied and ``Q`` is exact.
    """
    if not isinstance(Q, Mechanism):
        raise MechanismError("check_ldp expects a Mechanism")
    if exp_eps is None:
        if not eps > 0:
            raise DomainError("eps must be positive")
        growth = 1 + Fraction(math.expm1(eps))
    else:
        growth = Fraction(exp_eps)
    delta = Fraction(delta)
    if not 0 <= delta <= 1:
        raise DomainError("delta must lie in [0, 1]")
    if tol is None:
        tol = 0.0 if (exp_eps is not None and Q.exact) else FLOAT_TOL
    for col in Q.columns():
        # the binding pair is (argmax, argmin) of the column
        if not _slack_ok(growth * min(col) + delta - max(col), tol):
            return False
    return True


def ml_leakage_sum(Q: Mechanism) -> Fraction:
    return sum((max(col) for col in Q.columns()), Fraction(0))


def check_ml(Q: Mechanism, gamma: float, *, exp_gamma=None, tol: float | None = None) -> bool:
    """True iff ``sum_y max_x Q(y|x) <= e^gamma``."""
    if not isinstance(Q, Mechanism):
        raise MechanismError("check_ml expects a Mechanism")
    if exp_gamma is None:
        if not gamma > 0:
            raise DomainError("gamma must be positive")
        bound = 1 + Fraction(math.expm1(gamma))
    else:
        bound = Fraction(exp_gamma)
    if tol is None:
        tol = 0.0 if (exp_gamma is not None and Q.exact) else FLOAT_TOL
    return _slack_ok(bound - ml_leakage_sum(Q), tol)


def check_one_bit(Q: Mechanism) -> bool:
    return Q.num_outputs <= 2


def satisfies(Q: Mechanism, constraint: PrivacyConstraint) -> bool:
    """Check ``Q`` against ``constraint`` using the constraint's exact growth factor."""
    tol = 0.0 if Q.exact else FLOAT_TOL
    if constraint.kind == LDP:
        return check_ldp(Q, constraint.epsilon, constraint.delta, exp_eps=constraint.growth, tol=tol)
    return check_ml(Q, constraint.gamma, exp_gamma=constraint.growth, tol=tol)


def f_value(Q: Mechanism) -> Fraction:
    """``F(Q) = sum_w (sum_x Q(w|x)^2) / (sum_x Q(w|x))``.

    All-zero columns contribute 0. The result is exact.
    """
    total = Fraction(0)
    for col in Q.columns():
        s = sum(col, Fraction(0))
        if s == 0:
            continue
        total += sum((q * q for q in col), Fraction(0)) / s
    return total


def _check_a(a):
    if not 0 <= a <= 1:
        raise DomainError(f"a must lie in [0, 1], got {a!r}")


def f_two_level(a, t: int, v: int):
    """F of a one-bit mechanism whose first column has ``t`` entries ``a`` and ``v - t`` entries ``1 - a``."""
    _check_a(a)
    if not 1 <= t <= v - 1:
        raise DomainError(f"two-level formula needs 1 <= t <= v-1, got t={t}, v={v}")
    spread = Fraction(t * t + (v - t) ** 2, t * (v - t))
    b = 1 - a
    return 1 + (2 * a - 1) ** 2 / (a * a + spread * a * b + b * b)


def f_level_zero(a, t: int, v: int):
    """F of a one-bit mechanism whose first column has ``t`` entries ``a`` and the rest 0."""
    _check_a(a)
    if not 1 <= t <= v:
        raise DomainError(f"level-zero formula needs 1 <= t <= v, got t={t}, v={v}")
    gap = v - a * t
    if gap == 0:
        raise DomainError("v - a*t = 0: the complementary column is identically zero")
    return 2 - (1 - a) * v / gap


@dataclass(frozen=True)
class ExtremeFamily:
    """A set of extreme first columns: ``t`` entries ``high`` and ``v - t`` entries ``low``.

    ``low`` is ``1 - high`` for the two-level family, 0 for the level-zero
    family, and ``None`` for the zero column.
    """

    kind: str
    high: Fraction | None
    low: Fraction | None
    t_min: int
    t_max: int

    @property
    def t_range(self) -> range:
        return range(self.t_min, self.t_max + 1)

    def column(self, t: int, v: int) -> tuple[Fraction, ...]:
        if self.kind == ZERO_COLUMN:
            return (Fraction(0),) * v
        return (self.high,) * t + (self.low,) * (v - t)

    def mechanism(self, t: int, v: int) -> Mechanism:
        q = self.column(t, v)
        return Mechanism([[qx, 1 - qx] for qx in q], allow_zero_columns=True)

    def f(self, t: int, v: int):
        """Closed-form F at ``t``; degenerate members (a constant column) give 1."""
        if self.kind == ZERO_COLUMN:
            return Fraction(1)
        if self.kind == TWO_LEVEL:
            if t in (0, v):
                return Fraction(1)
            return f_two_level(self.high, t, v)
        if self.high == 0 or v - self.high * t == 0:
            return Fraction(1)
        return f_level_zero(self.high, t, v)


def extreme_column_families(c: PrivacyConstraint, v: int) -> list[ExtremeFamily]:
    """Column families whose mechanisms are exactly the extreme points of the one-bit set."""
    if c.kind == LDP:
        e, d = c.growth, c.delta
        high = (e + d) / (e + 1)
        return [
            ExtremeFamily(TWO_LEVEL, high, 1 - high, 0, v),
            ExtremeFamily(LEVEL_ZERO, d, Fraction(0), 1, v),
            ExtremeFamily(ZERO_COLUMN, None, None, 0, 0),
        ]
    return [
        ExtremeFamily(LEVEL_ZERO, c.ml_level, Fraction(0), 1, v),
        ExtremeFamily(ZERO_COLUMN, None, None, 0, 0),
    ]


@dataclass(frozen=True)
class SupF:
    value: Fraction
    family: ExtremeFamily
    t: int


def sup_f(c: PrivacyConstraint, v: int) -> SupF:
    """Maximise F over every extreme family and every admissible ``t`` by enumeration.

    Ties go to the earlier family (two-level, level-zero, zero column) and
    then to the smallest ``t``.
    """
    if v < 2:
        raise DomainError("v must be at least 2")
    best = None
    for fam in extreme_column_families(c, v):
        for t in fam.t_range:
            val = fam.f(t, v)
            if best is None or val > best.value:
                best = SupF(val, fam, t)
    return best


def sup_f_closed_form(c: PrivacyConstraint, v: int) -> Fraction:
    """Largest of the textbook candidates: balanced two-level column vs. a single nonzero entry."""
    if c.kind == ML:
        a = c.ml_level
        return 1 + a * (v - 1) / (v - a)
    e, d = c.growth, c.delta
    if v % 2 == 0:
        two_level = 1 + ((e + 2 * d - 1) / (e + 1)) ** 2
    else:
        alpha = (v - 1) // 2
        spread = Fraction(alpha**2 + (alpha + 1) ** 2, alpha * (alpha + 1))
        two_level = 1 + (e + 2 * d - 1) ** 2 / ((e + d) ** 2 + spread * (e + d) * (1 - d) + (1 - d) ** 2)
    level_zero = 1 + d * (v - 1) / (v - d)
    return max(two_level, level_zero)
