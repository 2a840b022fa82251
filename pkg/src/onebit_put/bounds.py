"""Closed-form privacy-utility trade-offs under a one-bit constraint.

Every function returns the first-order constant, i.e. the limit of ``n``
times the minimax worst-case MSE.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import DomainError


def _check_v(v: int) -> None:
    if int(v) != v or v < 2:
        raise DomainError(f"alphabet size v must be an integer >= 2, got {v!r}")


def _check_delta(delta: float) -> None:
    if not 0 <= delta <= 1:
        raise DomainError(f"delta must lie in [0, 1], got {delta!r}")


def even_size(v: int) -> int:
    """``2 * ceil(v / 2)``."""
    return v + (v % 2)


def zeta(v: int, delta: float) -> float:
    """LDP threshold below which the diagonal construction is optimal.

    ``zeta(v, 0) == 0``, so pure LDP never uses the diagonal regime.
    """
    _check_v(v)
    delta = float(delta)
    _check_delta(delta)
    w = even_size(v)
    return math.log1p(2.0 * (math.sqrt(delta * (w - 1) * (w - delta)) - delta) / w)


def put_ldp(v: int, eps: float, delta: float) -> float:
    """First-order PUT under (eps, delta)-LDP and one bit of communication.

    At ``eps == zeta(v, delta)`` the block-design branch is used; the two
    branches agree there.
    """
    _check_v(v)
    delta = float(delta)
    _check_delta(delta)
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    head = (v - 1) ** 2 / v
    if eps >= zeta(v, delta):
        em1 = math.expm1(eps)
        gap = em1 + 2.0 * delta  # e^eps + 2 delta - 1
        if v % 2 == 0:
            return head * ((em1 + 2.0) / gap) ** 2
        cross = 4.0 / (v * v - 1) * (em1 + 1.0 + delta) * (1.0 - delta)
        return head * ((em1 + 2.0) ** 2 + cross) / gap**2
    return (v - 1) * (v - delta) / (v * delta)


def put_ml(v: int, gamma: float) -> float:
    """First-order PUT under gamma-ML and one bit; gamma must lie in (0, log 2]."""
    _check_v(v)
    if not 0 < gamma <= math.log(2):
        raise DomainError(f"gamma must lie in (0, log 2], got {gamma!r}")
    level = min(1.0, math.expm1(gamma))
    return (v - 1) * (v - level) / (v * level)


def lan_lower_bound(v: int, sup_f_value) -> float:
    """``(v-1)^2 / (v (F* - 1))`` for the largest attainable F over one-bit mechanisms."""
    _check_v(v)
    if isinstance(sup_f_value, (int, Fraction)):
        excess = Fraction(sup_f_value) - 1
        if excess <= 0:
            raise DomainError("sup F must exceed 1 for a finite bound")
        return float(Fraction((v - 1) ** 2) / (v * excess))
    excess = float(sup_f_value) - 1.0
    if not excess > 0:
        raise DomainError("sup F must exceed 1 for a finite bound")
    return (v - 1) ** 2 / (v * excess)


def put(v: int, constraint) -> float:
    """Dispatch on a :class:`~onebit_put.mechanisms.PrivacyConstraint`."""
    if constraint.is_ldp:
        return put_ldp(v, constraint.epsilon, float(constraint.delta))
    return put_ml(v, constraint.gamma)
