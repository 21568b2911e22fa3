"""Episode metrics, efficiency improvements and Welch's t-test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class EpisodeMetrics:
    step_count: int
    turn_count: int
    fuzzy_count: int = 0
    fallback_count: int = 0
    completed: bool = True


@dataclass(frozen=True)
class CellStats:
    mean_steps: float
    mean_turns: float
    n: int
    raw: tuple[EpisodeMetrics, ...] = field(default_factory=tuple)

    @property
    def steps(self) -> list[int]:
        return [m.step_count for m in self.raw]

    @property
    def completed(self) -> int:
        return sum(m.completed for m in self.raw)


def summarize(records: Sequence[EpisodeMetrics]) -> CellStats:
    if not records:
        raise MetricsError("cannot summarize an empty list of episodes")
    n = len(records)
    return CellStats(
        mean_steps=math.fsum(r.step_count for r in records) / n,
        mean_turns=math.fsum(r.turn_count for r in records) / n,
        n=n,
        raw=tuple(records),
    )


def efficiency_1(single_steps: float, collab_steps: float) -> float:
    """Relative step reduction of collaborative over single-agent execution."""
    if single_steps <= 0:
        raise MetricsError("single-agent step count must be positive")
    return (single_steps - collab_steps) / single_steps


def efficiency_2(base_steps: float, new_steps: float) -> float:
    """Relative step reduction of a prompt combination over the base prompts."""
    if base_steps <= 0:
        raise MetricsError("base step count must be positive")
    return (base_steps - new_steps) / base_steps


# --- Student-t tail via the regularized incomplete beta function -------------

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 1000


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0:
        return 1.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p_two_tailed: float


def _mean_var(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mean = math.fsum(xs) / n
    return mean, math.fsum((x - mean) ** 2 for x in xs) / (n - 1)


def welch_t(sample_a: Sequence[float], sample_b: Sequence[float]) -> TTestResult:
    """Welch's unequal-variance t-test with Welch-Satterthwaite df."""
    na, nb = len(sample_a), len(sample_b)
    if na < 2 or nb < 2:
        raise MetricsError("each sample needs at least two observations")
    mean_a, var_a = _mean_var(sample_a)
    mean_b, var_b = _mean_var(sample_b)
    if var_a == 0 and var_b == 0:
        raise MetricsError("both samples have zero variance; t is undefined")
    se_a, se_b = var_a / na, var_b / nb
    t = (mean_a - mean_b) / math.sqrt(se_a + se_b)
    df = (se_a + se_b) ** 2 / (se_a**2 / (na - 1) + se_b**2 / (nb - 1))
    return TTestResult(t, df, student_t_two_tailed(t, df))
