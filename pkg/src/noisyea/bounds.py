"""Closed-form runtime bounds for the no-re-evaluation (1+1) EA.

* one-bit mutation + one-bit noise: ``(1+q) n^2 / (1-q)^2 + 3q / (2(1-q))``
  for ``q < 1``;
* standard bit mutation (rate chi/n) + bitwise noise (rate q/n):
  ``n^2 / c * (e^{chi+q}/chi + q (e^{chi+q}/chi)^2) + O(n)`` for any
  constant ``c`` in (0, 1) with ``lhs(chi, q) <= (1 - c) e^{-(chi+q)}``,
  where ``lhs = -ln(1 - q/r) / ln(r/q)`` and ``r = chi + q - 2 chi q / n``.

Feasibility is decided with the ``n -> infinity`` limit ``r = chi + q``;
reports also carry the finite-``n`` value of ``r``.  The ``O(n)`` term has
no published constant and is reported as a caveat, never as a number.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

CAVEAT_ORDER_N = "additive O(n) term omitted: no constant is known"
CAVEAT_CHOSEN_C = "bound evaluated at a caller-supplied c instead of the largest admissible c"


class InfeasibleError(ValueError):
    """The parameters lie outside the range where the bound holds."""


@dataclass(frozen=True)
class BoundReport:
    theorem: int
    n: int
    chi: Optional[float]
    q: float
    r: Optional[float]
    lhs: Optional[float]
    rhs_at_c: Optional[float]
    max_c: Optional[float]
    c: Optional[float]
    bound: Optional[float]
    feasible: bool
    caveats: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def bound_one_bit(n: int, q: float) -> float:
    if not 0 <= q < 1:
        raise InfeasibleError(f"one-bit bound needs 0 <= q < 1, got q={q}")
    return (1 + q) * n * n / (1 - q) ** 2 + 3 * q / (2 * (1 - q))


def one_bit_report(n: int, q: float) -> BoundReport:
    feasible = 0 <= q < 1
    return BoundReport(
        theorem=1, n=n, chi=None, q=q, r=None, lhs=None, rhs_at_c=None,
        max_c=None, c=None, bound=bound_one_bit(n, q) if feasible else None,
        feasible=feasible,
    )


def flip_rate_r(chi: float, q: float, n: float = math.inf) -> float:
    """``r/n`` is the chance that a bit is flipped by exactly one of mutation and noise."""
    if math.isinf(n):
        return chi + q
    return chi + q - 2 * chi * q / n


def condition_lhs(chi: float, q: float, n: float = math.inf) -> float:
    """``-ln(1 - q/r) / ln(r/q)``; 0 at ``q = 0`` and ``inf`` once ``q >= r``."""
    if chi <= 0:
        raise ValueError(f"chi must be positive, got {chi}")
    if q < 0:
        raise ValueError(f"q must be non-negative, got {q}")
    if q == 0:
        return 0.0
    r = flip_rate_r(chi, q, n)
    if q >= r:
        return math.inf
    return -math.log1p(-q / r) / math.log(r / q)


def max_admissible_c(chi: float, q: float) -> float:
    """Largest c with lhs <= (1 - c) e^{-(chi+q)}; <= 0 means infeasible."""
    return 1.0 - condition_lhs(chi, q) * math.exp(chi + q)


def bitwise_bound_value(n: int, chi: float, q: float, c: float) -> float:
    g = math.exp(chi + q) / chi
    return n * n / c * (g + q * g * g)


def bound_bitwise(n: int, chi: float, q: float, c: float | None = None) -> BoundReport:
    if chi <= 0 or q < 0:
        raise ValueError(f"need chi > 0 and q >= 0, got chi={chi}, q={q}")
    lhs = condition_lhs(chi, q)
    max_c = max_admissible_c(chi, q)
    feasible = max_c > 0
    caveats = [CAVEAT_ORDER_N]
    if c is None:
        c_used = min(max_c, 1.0) if feasible else None
    else:
        if not 0 < c <= 1:
            raise ValueError(f"c must lie in (0, 1], got {c}")
        c_used = c
        feasible = feasible and c <= max_c
        caveats.append(CAVEAT_CHOSEN_C)
    rhs = (1 - c_used) * math.exp(-(chi + q)) if c_used is not None else None
    bound = bitwise_bound_value(n, chi, q, c_used) if feasible else None
    return BoundReport(
        theorem=2, n=n, chi=chi, q=q, r=flip_rate_r(chi, q, n),
        lhs=lhs, rhs_at_c=rhs, max_c=max_c if feasible else None, c=c_used if feasible else None,
        bound=bound, feasible=feasible, caveats=caveats,
    )


def is_strictly_feasible(chi: float, q: float) -> bool:
    return condition_lhs(chi, q) < math.exp(-(chi + q))


def max_q_for_chi(chi: float, tol: float = 1e-9) -> tuple[float, bool]:
    """Largest bitwise noise strength q admitting some constant c > 0.

    Bisection on (0, chi): the condition fails at q = chi, where the
    left-hand side equals 1.  Returns ``(q, found)``; ``found`` is False
    (and q = 0) when no positive q is feasible.
    """
    if chi <= 0 or tol <= 0:
        raise ValueError("chi and tol must be positive")
    lo, hi = 0.0, chi
    # probe downwards until a feasible point brackets the frontier
    probe = chi / 2
    while not is_strictly_feasible(chi, probe):
        hi = probe
        probe /= 2
        if probe < tol * 1e-3:
            return 0.0, False
    lo = probe
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_strictly_feasible(chi, mid):
            lo = mid
        else:
            hi = mid
    return lo, True
