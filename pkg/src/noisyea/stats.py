"""Sample summaries and Welch's two-sample t-test.

The Student-t tail is evaluated through the regularized incomplete beta
function, ``P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)``, computed with the
modified Lentz continued fraction.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

CF_MAX_ITER = 10_000
CF_EPS = 1e-16
CF_TINY = 1e-300


class DegenerateSampleError(ValueError):
    """The test statistic is undefined for the given samples."""


@dataclass(frozen=True)
class SampleSummary:
    count: int
    mean: float
    std: float
    min: float
    max: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class WelchReport:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float

    def to_dict(self) -> dict:
        return {"t": self.t_statistic, "df": self.degrees_of_freedom, "p": self.p_value}


def _mean_var(sample: Sequence[float]) -> tuple[float, float]:
    n = len(sample)
    mean = math.fsum(sample) / n
    if n == 1:
        return mean, 0.0
    return mean, math.fsum((v - mean) ** 2 for v in sample) / (n - 1)


def summarize(sample: Sequence[float]) -> SampleSummary:
    """Count, mean, sample standard deviation (divisor count - 1), min, max."""
    values = [float(v) for v in sample]
    if not values:
        raise ValueError("cannot summarize an empty sample")
    mean, var = _mean_var(values)
    lo, hi = min(values), max(values)
    if lo == hi:
        mean, var = lo, 0.0
    mean = min(max(mean, lo), hi)
    return SampleSummary(len(values), mean, math.sqrt(var), lo, hi)


def _beta_cf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < CF_TINY:
        d = CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < CF_TINY:
            d = CF_TINY
        c = 1.0 + aa / c
        if abs(c) < CF_TINY:
            c = CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < CF_TINY:
            d = CF_TINY
        c = 1.0 + aa / c
        if abs(c) < CF_TINY:
            c = CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)`` for ``a, b > 0``, ``0 <= x <= 1``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    # the fraction converges fast only on the near side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _beta_cf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    return regularized_beta(df / (df + t * t), df / 2.0, 0.5)


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> WelchReport:
    """Welch's unequal-variance t-test with a two-sided p-value."""
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if len(a) < 2 or len(b) < 2:
        raise DegenerateSampleError("each sample needs at least two values")
    mean_a, var_a = _mean_var(a)
    mean_b, var_b = _mean_var(b)
    se_a = var_a / len(a)
    se_b = var_b / len(b)
    se2 = se_a + se_b
    if se2 == 0.0:
        raise DegenerateSampleError("both samples have zero variance")
    t = (mean_a - mean_b) / math.sqrt(se2)
    df = se2 * se2 / (se_a * se_a / (len(a) - 1) + se_b * se_b / (len(b) - 1))
    return WelchReport(t, df, t_two_sided_p(t, df))
