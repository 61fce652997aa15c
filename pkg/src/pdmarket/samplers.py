"""Sampling constructions for the two-parameter Poisson-Dirichlet family.

Four routes to ranked weights:

* gamma-normalized symmetric Dirichlet;
* size-biased stick-breaking, z_k ~ Beta(1-alpha, theta+alpha*k);
* sequential Chinese Restaurant seating (returns a partition shape);
* ranked jumps of a tempered stable subordinator over a gamma-distributed
  time window (the Pitman-Yor subordinator representation, alpha > 0 only).

Plus the broken-stick expectations and rank/normalize plumbing.

Determinism: every entry point takes an integer seed and owns its RNG; the
same seed and parameters give bit-identical output.  Ensemble seeds derive
from ``derive_seed(seed, index)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln

from .errors import ConfigError, DataError, DomainError
from .params import PDParams
from .partitions import FrequencyVector

__all__ = [
    "RankedWeights",
    "TruncationRule",
    "derive_seed",
    "sample_symmetric_dirichlet",
    "sample_dirichlet_with_totals",
    "sample_sticks_size_biased",
    "sample_sticks_matrix",
    "sample_crp",
    "sample_crp_class_counts",
    "sample_subordinator",
    "sample_subordinator_batch",
    "broken_stick_expected",
    "rank_normalize",
]


def derive_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Per-task seed for reproducible parallel ensembles."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class RankedWeights:
    """Descending weights on the (truncated) Kingman simplex.

    ``residual`` is the probability mass beyond the truncation point, so
    weights and residual always account for the full unit of mass.
    """

    weights: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.size and (np.any(w < 0) or np.any(np.diff(w) > 0)):
            raise DataError("weights must be non-negative and descending")
        if self.residual < 0:
            raise DataError(f"residual must be non-negative: {self.residual}")
        total = math.fsum(w.tolist()) + self.residual
        if abs(total - 1.0) > 1e-12:
            raise DataError(f"weights + residual must sum to 1; got {total}")


@dataclass(frozen=True)
class TruncationRule:
    """Stopping rule for infinite stick-breaking sequences.

    Stops when the unbroken residual drops below ``eps``, or after
    ``max_sticks`` pieces.  With ``top_ranks`` set, also stops as soon as the
    top ``top_ranks`` ranked weights are final (residual below the current
    ``top_ranks``-th largest piece), which certifies those ranks exactly.
    """

    eps: float = 1e-8
    max_sticks: int = 100_000
    top_ranks: int | None = None

    def __post_init__(self):
        if self.eps <= 0 and self.max_sticks <= 0:
            raise ConfigError("truncation needs eps > 0 or max_sticks > 0")
        if self.top_ranks is not None and self.top_ranks < 1:
            raise ConfigError(f"top_ranks must be >= 1; got {self.top_ranks}")


def _ranked(x: np.ndarray) -> RankedWeights:
    order = np.argsort(-x, kind="stable")
    w = x[order]
    residual = max(0.0, 1.0 - math.fsum(w.tolist()))
    return RankedWeights(w, residual)


def sample_symmetric_dirichlet(m: int, alpha: float, seed=0) -> RankedWeights:
    """Ranked symmetric Dirichlet(alpha, ..., alpha) via gamma normalization."""
    w, _ = sample_dirichlet_with_totals(m, alpha, 1, seed)
    return RankedWeights(w[0], 0.0)


def sample_dirichlet_with_totals(
    m: int, alpha: float, size: int, seed=0
) -> tuple[np.ndarray, np.ndarray]:
    """Batch of ranked Dirichlet samples plus their pre-normalization sums.

    Returns (weights matrix of shape (size, m), totals of shape (size,)).
    The totals are Gamma(m*alpha, 1) and independent of the weights.
    """
    if m < 1:
        raise DomainError(f"m must be >= 1; got {m}")
    if alpha <= 0:
        raise DomainError(f"Dirichlet alpha must be positive; got {alpha}")
    rng = _rng(seed)
    g = rng.gamma(alpha, size=(size, m))
    totals = g.sum(axis=1)
    w = -np.sort(-g, axis=1) / totals[:, None]
    return w, totals


def _beta_two_gamma(rng, a: float, b: np.ndarray) -> np.ndarray:
    # two-gamma construction keeps accuracy uniform across extreme shapes
    x = rng.gamma(a, size=b.shape)
    y = rng.gamma(b)
    return x / (x + y)


def sample_sticks_size_biased(
    p: PDParams, trunc: TruncationRule | None = None, seed=0
) -> RankedWeights:
    """Ranked weights from size-biased stick-breaking at (alpha, theta).

    In the finite regime the sequence stops at exactly m pieces, the last
    piece being the unbroken remainder; residual is then 0.
    """
    if trunc is None:
        trunc = TruncationRule()
    rng = _rng(seed)
    a, t = p.alpha, p.theta
    if p.is_finite:
        m = p.m
        ks = np.arange(1, m, dtype=float)
        z = _beta_two_gamma(rng, 1.0 - a, t + a * ks)
        x = np.empty(m)
        rem = 1.0
        for i, zi in enumerate(z):
            x[i] = zi * rem
            rem *= 1.0 - zi
        x[m - 1] = rem
        return _ranked(x)

    block = 512
    pieces: list[np.ndarray] = []
    rem = 1.0
    count = 0
    while True:
        take = min(block, trunc.max_sticks - count)
        if take <= 0:
            break
        ks = np.arange(count + 1, count + take + 1, dtype=float)
        z = _beta_two_gamma(rng, 1.0 - a, t + a * ks)
        rems = rem * np.cumprod(1.0 - z)
        x = z * np.concatenate(([rem], rems[:-1]))
        below = np.nonzero(rems < trunc.eps)[0]
        if below.size:
            stop = below[0] + 1
            pieces.append(x[:stop])
            count += stop
            rem = rems[stop - 1]
            break
        pieces.append(x)
        count += take
        rem = rems[-1]
        if trunc.top_ranks is not None and count >= trunc.top_ranks:
            all_x = np.concatenate(pieces)
            kth = np.partition(all_x, -trunc.top_ranks)[-trunc.top_ranks]
            if rem < kth:
                break
    return _ranked(np.concatenate(pieces))


def sample_sticks_matrix(
    p: PDParams,
    n_samples: int,
    n_sticks: int,
    seed=0,
    uniforms: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch stick-breaking: (ranked weights (n_samples, n_sticks), residuals).

    With ``uniforms`` supplied (shape at least (n_samples, n_sticks)), sticks
    come from the beta inverse CDF applied to those fixed uniforms, giving
    weights that vary smoothly with (alpha, theta) -- the common-random-numbers
    device used by the curve fitter.  In the finite regime columns past m - 1
    are the remainder followed by zeros.
    """
    a, t = p.alpha, p.theta
    rng = _rng(seed)
    if n_sticks < 1:
        raise ConfigError(f"n_sticks must be >= 1; got {n_sticks}")
    full_finite = p.is_finite and n_sticks >= p.m
    if full_finite:
        n_cols = p.m
        n_draw = p.m - 1
    else:
        n_cols = n_sticks
        n_draw = n_sticks
    ks = np.arange(1, n_draw + 1, dtype=float)
    b = t + a * ks
    if n_draw == 0:
        # finite regime with m = 1: the whole stick is one piece
        return np.ones((n_samples, 1)), np.zeros(n_samples)
    if uniforms is not None:
        from scipy.special import betaincinv

        u = uniforms[:n_samples, :n_draw]
        z = betaincinv(1.0 - a, b[None, :], u)
    else:
        z = _beta_two_gamma(rng, 1.0 - a, np.broadcast_to(b, (n_samples, n_draw)))
    rems = np.cumprod(1.0 - z, axis=1)
    x = np.empty((n_samples, n_cols))
    x[:, :n_draw] = z * np.concatenate(
        [np.ones((n_samples, 1)), rems[:, :-1]], axis=1
    )
    if full_finite:
        x[:, -1] = rems[:, -1]
        residuals = np.zeros(n_samples)
    else:
        residuals = rems[:, -1].copy()
    x = -np.sort(-x, axis=1)
    return x, residuals


def sample_crp(n: int, p: PDParams, seed=0) -> FrequencyVector:
    """Seat n customers by the Chinese Restaurant rule; return the shape."""
    if n < 1:
        raise DomainError(f"n must be >= 1; got {n}")
    rng = _rng(seed)
    us = rng.random(n - 1)
    a, t = p.alpha, p.theta
    blocks = [1]
    for j in range(1, n):
        u = us[j - 1] * (j + t)
        acc = 0.0
        placed = False
        for i in range(len(blocks)):
            acc += blocks[i] - a
            if u < acc:
                blocks[i] += 1
                placed = True
                break
        if not placed:
            blocks.append(1)
    blocks.sort(reverse=True)
    return FrequencyVector(tuple(blocks))


def sample_crp_class_counts(
    n: int, p: PDParams, draws: int, seed=0
) -> dict[tuple[int, ...], int]:
    """Empirical shape counts from independent CRP draws.

    Shares the seating loop with :func:`sample_crp`; uniforms are pre-drawn
    in one batch so a run of ``draws`` seatings is a single RNG stream.
    """
    if draws < 1:
        raise DomainError(f"draws must be >= 1; got {draws}")
    rng = _rng(seed)
    a, t = p.alpha, p.theta
    counts: dict[tuple[int, ...], int] = {}
    chunk = 100_000
    done = 0
    while done < draws:
        take = min(chunk, draws - done)
        us = rng.random((take, n - 1)) if n > 1 else np.empty((take, 0))
        for row in us:
            blocks = [1]
            for j in range(1, n):
                u = row[j - 1] * (j + t)
                acc = 0.0
                placed = False
                for i in range(len(blocks)):
                    acc += blocks[i] - a
                    if u < acc:
                        blocks[i] += 1
                        placed = True
                        break
                if not placed:
                    blocks.append(1)
            blocks.sort(reverse=True)
            key = tuple(blocks)
            counts[key] = counts.get(key, 0) + 1
        done += take
    return counts


# ---------------------------------------------------------------------------
# Tempered stable subordinator (inverse-Levy construction)
# ---------------------------------------------------------------------------


def _tail_log(x: np.ndarray, alpha: float) -> np.ndarray:
    """log of the tail Levy measure of the tempered stable subordinator.

    tail(x) = alpha/Gamma(1-alpha) * int_x^inf y^(-alpha-1) exp(-y) dy.
    Direct evaluation cancels badly for large x, so an asymptotic series
    takes over past x = 15.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    lo = x < 15.0
    if np.any(lo):
        xl = x[lo]
        direct = (
            np.exp(-xl - alpha * np.log(xl) - gammaln(1.0 - alpha))
            - gammaincc(1.0 - alpha, xl)
        )
        out[lo] = np.log(direct)
    if np.any(~lo):
        xh = x[~lo]
        # int_x^inf y^(-a-1) e^-y dy ~ e^-x x^(-a-1) sum (-1)^j (a+1)_j / x^j
        series = np.ones_like(xh)
        term = np.ones_like(xh)
        for j in range(1, 12):
            term = term * (-(alpha + j) / xh)
            series = series + term
        out[~lo] = (
            math.log(alpha)
            - gammaln(1.0 - alpha)
            - xh
            - (alpha + 1.0) * np.log(xh)
            + np.log(series)
        )
    return out


_TAIL_GRIDS: dict[float, tuple[np.ndarray, np.ndarray]] = {}


def _tail_grid(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    grid = _TAIL_GRIDS.get(alpha)
    if grid is None:
        log_x = np.linspace(math.log(1e-12), math.log(60.0), 4000)
        log_tail = _tail_log(np.exp(log_x), alpha)
        grid = (log_tail[::-1].copy(), log_x[::-1].copy())  # ascending in log_tail
        _TAIL_GRIDS[alpha] = grid
    return grid


def _invert_tail(targets: np.ndarray, alpha: float) -> np.ndarray:
    """Solve tail(x) = target, vectorized: grid interpolation + Newton polish."""
    log_t = np.log(targets)
    log_tail_grid, log_x_grid = _tail_grid(alpha)
    log_x = np.interp(log_t, log_tail_grid, log_x_grid)
    # below the grid the tail is pure power law alpha-ish: refine anyway
    x = np.exp(log_x)
    for _ in range(4):
        f = _tail_log(x, alpha) - log_t
        # d log tail / dx = -nu(x)/tail(x)
        log_nu = (
            math.log(alpha)
            - gammaln(1.0 - alpha)
            - (alpha + 1.0) * np.log(x)
            - x
        )
        deriv = -np.exp(log_nu - _tail_log(x, alpha))
        step = f / deriv
        x = np.clip(x - step, x * 0.2, x * 5.0)
    return x


def sample_subordinator(
    p: PDParams, n_jumps: int, seed=0
) -> tuple[RankedWeights, float]:
    """Largest jumps of the tempered stable subordinator over [0, T].

    T ~ Gamma(theta/alpha, 1); jumps come largest-first from the inverse of
    the tail Levy measure at unit-rate Poisson epochs.  The total S adds the
    expected mass of the infinitely many jumps below the smallest generated
    one, so S ~ Gamma(theta, 1) holds in the mean.  Requires alpha > 0.
    """
    w, s = sample_subordinator_batch(p, n_jumps, 1, seed)
    resid = max(0.0, 1.0 - math.fsum(w[0].tolist()))
    return RankedWeights(w[0], resid), float(s[0])


def sample_subordinator_batch(
    p: PDParams, n_jumps: int, size: int, seed=0
) -> tuple[np.ndarray, np.ndarray]:
    """Batched subordinator sampling: (normalized jumps (size, n_jumps), totals)."""
    a, t = p.alpha, p.theta
    if not (0.0 < a < 1.0) or t <= 0.0:
        raise DomainError(
            "subordinator representation requires 0 < alpha < 1 and theta > 0"
        )
    if n_jumps < 1:
        raise DomainError(f"n_jumps must be >= 1; got {n_jumps}")
    rng = _rng(seed)
    T = rng.gamma(t / a, size=size)
    epochs = np.cumsum(rng.exponential(size=(size, n_jumps)), axis=1)
    eta = _invert_tail(epochs / T[:, None], a)
    # expected mass below the smallest generated jump
    leftover = T * a * gammainc(1.0 - a, eta[:, -1])
    totals = eta.sum(axis=1) + leftover
    return eta / totals[:, None], totals


def broken_stick_expected(n: int) -> np.ndarray:
    """Expected ranked piece lengths when n-1 uniform cuts break a unit stick.

    k-th largest piece has expectation (1/n) * sum_{j=k..n} 1/j.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1; got {n}")
    inv = 1.0 / np.arange(1, n + 1)
    return np.cumsum(inv[::-1])[::-1] / n


def rank_normalize(values) -> RankedWeights:
    """Sort non-negative values descending and normalize by their sum."""
    v = np.asarray(list(values), dtype=float)
    if v.size == 0 or np.any(v < 0) or not np.any(v > 0):
        raise DataError("need non-negative values with at least one positive")
    order = np.argsort(-v, kind="stable")
    w = v[order] / math.fsum(v.tolist())
    return RankedWeights(w, max(0.0, 1.0 - math.fsum(w.tolist())))
