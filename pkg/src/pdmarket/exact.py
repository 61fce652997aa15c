"""Exact Ewens and Pitman sampling formulas over partition classes.

All probabilities live in natural-log space with ``-inf`` as the zero
sentinel; exponentiation happens only at API boundaries.  The combinatorial
factor n!/prod(c_j! (j!)^{c_j}) overflows 64-bit floats long before n = 200,
so everything is assembled from log-factorials.
"""

from __future__ import annotations

import math

from .errors import DomainError
from .params import PDParams
from .partitions import PartitionClass, down_neighbors, enumerate_classes, class_to_freq, freq_to_class

NEG_INF = float("-inf")

_LOG_FACT_CAP = 10**6
_log_fact_table: list[float] = [0.0, 0.0]


def _log_factorial(n: int) -> float:
    if n >= _LOG_FACT_CAP:
        return math.lgamma(n + 1.0)
    table = _log_fact_table
    while len(table) <= n:
        table.append(table[-1] + math.log(len(table)))
    return table[n]


def rising_factorial_log(x: float, n: int, step: float) -> float:
    """log of the generalized rising factorial x(x+step)...(x+(n-1)step).

    The empty product (n = 0) gives 0.  Raises if any factor is non-positive;
    callers that need the zero-probability semantics check factors themselves.
    """
    if n < 0:
        raise DomainError(f"n must be non-negative; got {n}")
    if n == 0:
        return 0.0
    if step == 1.0 and x > 0.0:
        return math.lgamma(x + n) - math.lgamma(x)
    total = 0.0
    for j in range(n):
        factor = x + j * step
        if factor <= 0.0:
            raise DomainError(
                f"non-positive factor {factor} at index {j} in rising factorial"
            )
        total += math.log(factor)
    return total


def _log_class_weight_esf(c: PartitionClass) -> float:
    # log of n! / prod(c_j! * j^{c_j})
    total = _log_factorial(c.n)
    for j, cj in enumerate(c.mult, start=1):
        total -= _log_factorial(cj) + cj * math.log(j)
    return total


def esf_log_prob(c: PartitionClass, theta: float) -> float:
    """Ewens sampling formula: log of theta^k / theta^(n) * n!/prod(c_j! j^c_j)."""
    if theta <= 0.0:
        raise DomainError(f"ESF requires theta > 0; got {theta}")
    n, k = c.n, c.k
    if n == 0:
        return 0.0
    return (
        k * math.log(theta)
        - rising_factorial_log(theta, n, 1.0)
        + _log_class_weight_esf(c)
    )


def psf_log_prob(c: PartitionClass, p: PDParams) -> float:
    """Pitman sampling formula for either parameter regime.

    Classes with more blocks than the finite regime supports get -inf.
    The common leading factor theta cancels between theta^(k,alpha) and
    theta^(n), which keeps the evaluation valid for theta in (-alpha, 0].
    """
    n, k = c.n, c.k
    if n == 0:
        return 0.0
    a, t = p.alpha, p.theta
    # theta^(k,alpha) / theta^(n) with the first factor cancelled
    log_ratio = 0.0
    for j in range(1, k):
        factor = t + a * j
        if factor <= 0.0:
            return NEG_INF  # finite regime: more than m blocks is impossible
        log_ratio += math.log(factor)
    log_ratio -= rising_factorial_log(t + 1.0, n - 1, 1.0)
    total = log_ratio + _log_factorial(n)
    for i, ci in enumerate(c.mult, start=1):
        if ci == 0:
            continue
        total -= _log_factorial(ci)
        total += ci * (
            rising_factorial_log(1.0 - a, i - 1, 1.0) - _log_factorial(i)
        )
    return total


def consistency_check(n: int, p: PDParams) -> float:
    """Kingman consistency: push the level-n PSF law down one level.

    Returns the max absolute deviation between the induced level-(n-1)
    distribution and the PSF evaluated directly at n-1.
    """
    if n < 2:
        raise DomainError(f"consistency check needs n >= 2; got {n}")
    induced: dict[PartitionClass, float] = {}
    for c in enumerate_classes(n):
        prob = math.exp(psf_log_prob(c, p))
        if prob == 0.0:
            continue
        for g, w in down_neighbors(class_to_freq(c)):
            key = freq_to_class(g)
            induced[key] = induced.get(key, 0.0) + float(w) * prob
    worst = 0.0
    for c in enumerate_classes(n - 1):
        direct = math.exp(psf_log_prob(c, p))
        worst = max(worst, abs(direct - induced.get(c, 0.0)))
    return worst
