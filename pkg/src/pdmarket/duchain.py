"""Down-up Markov chain on partition shapes at fixed n.

One chain step is a Down move (uniform box deletion) followed by an Up move
(Chinese Restaurant insertion), which returns the total to n and preserves
the Pitman sampling formula.  The state is a multiset of block sizes keyed
by size, so a step costs O(distinct sizes) and n can be large.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, StateError
from .params import PDParams
from .partitions import FrequencyVector
from .samplers import _rng, sample_crp


@dataclass(frozen=True)
class ChainConfig:
    n: int
    p: PDParams
    steps: int
    record_top: int = 5
    thin: int | None = None  # default: one sweep (n down-up pairs) per record
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n must be >= 1; got {self.n}")
        if self.steps < 0:
            raise ConfigError(f"steps must be >= 0; got {self.steps}")
        if self.record_top < 1:
            raise ConfigError(f"record_top must be >= 1; got {self.record_top}")
        if self.thin is not None and self.thin < 1:
            raise ConfigError(f"thin must be >= 1; got {self.thin}")

    @property
    def effective_thin(self) -> int:
        return self.thin if self.thin is not None else self.n


@dataclass
class Trajectory:
    """Recorded top-k normalized weights along a chain run."""

    times: np.ndarray
    series: np.ndarray  # shape (records, k), rows descending

    def to_csv_rows(self):
        yield ["step"] + [f"x{i + 1}" for i in range(self.series.shape[1])]
        for t, row in zip(self.times, self.series):
            yield [int(t)] + [f"{v:.10g}" for v in row]


# -- multiset-of-sizes state ------------------------------------------------


def _state_from_freq(f: FrequencyVector) -> dict[int, int]:
    state: dict[int, int] = {}
    for b in f.blocks:
        state[b] = state.get(b, 0) + 1
    return state


def _state_to_blocks(state: dict[int, int]) -> tuple[int, ...]:
    blocks = []
    for size in sorted(state, reverse=True):
        blocks.extend([size] * state[size])
    return tuple(blocks)


def _down(state: dict[int, int], n: int, u: float) -> int:
    """Remove one box chosen uniformly among n; returns n - 1."""
    target = u * n
    acc = 0.0
    # iterate large sizes first: deterministic and few distinct sizes
    for size in sorted(state, reverse=True):
        acc += size * state[size]
        if target < acc:
            _shift(state, size, size - 1)
            return n - 1
    # u == 1.0 edge: take the smallest size
    size = min(state)
    _shift(state, size, size - 1)
    return n - 1


def _up(state: dict[int, int], n: int, p: PDParams, u: float) -> int:
    """One Chinese Restaurant insertion; returns n + 1."""
    if n == 0:
        state[1] = 1
        return 1
    a, t = p.alpha, p.theta
    target = u * (n + t)
    acc = 0.0
    for size in sorted(state, reverse=True):
        acc += state[size] * (size - a)
        if target < acc:
            _shift(state, size, size + 1)
            return n + 1
    state[1] = state.get(1, 0) + 1
    return n + 1


def _shift(state: dict[int, int], src: int, dst: int) -> None:
    state[src] -= 1
    if state[src] == 0:
        del state[src]
    if dst > 0:
        state[dst] = state.get(dst, 0) + 1


def _top_weights(state: dict[int, int], n: int, k: int) -> list[float]:
    out = []
    for size in sorted(state, reverse=True):
        out.extend([size / n] * state[size])
        if len(out) >= k:
            break
    out = out[:k]
    out.extend([0.0] * (k - len(out)))
    return out


# -- public single-shape steps ---------------------------------------------


def down_step(f: FrequencyVector, seed=0) -> FrequencyVector:
    """Delete one box uniformly at random."""
    if f.n == 0:
        raise StateError("cannot delete a box from the empty partition")
    state = _state_from_freq(f)
    _down(state, f.n, float(_rng(seed).random()))
    return FrequencyVector(_state_to_blocks(state))


def up_step(f: FrequencyVector, p: PDParams, seed=0) -> FrequencyVector:
    """Insert one box by the Chinese Restaurant rule."""
    state = _state_from_freq(f)
    _up(state, f.n, p, float(_rng(seed).random()))
    return FrequencyVector(_state_to_blocks(state))


def run_chain(cfg: ChainConfig, init: FrequencyVector | str = "stationary") -> Trajectory:
    """Run the down-up chain, recording top-k weights every ``thin`` pairs.

    ``init="stationary"`` seats the initial shape with a CRP draw, so the
    chain starts in (and preserves) the Pitman sampling law.
    """
    rng = _rng(cfg.seed)
    if isinstance(init, str):
        if init != "stationary":
            raise ConfigError(f"unknown init: {init!r}")
        f0 = sample_crp(cfg.n, cfg.p, rng)
    else:
        if init.n != cfg.n:
            raise ConfigError(
                f"init has n={init.n} but the chain is configured for n={cfg.n}"
            )
        f0 = init
    state = _state_from_freq(f0)
    thin = cfg.effective_thin
    times = [0]
    rows = [_top_weights(state, cfg.n, cfg.record_top)]
    n = cfg.n
    for step in range(1, cfg.steps + 1):
        u1, u2 = rng.random(2)
        n = _down(state, n, u1)
        n = _up(state, n, cfg.p, u2)
        if step % thin == 0:
            times.append(step)
            rows.append(_top_weights(state, n, cfg.record_top))
    return Trajectory(np.array(times), np.array(rows))


def chain_class_counts(
    cfg: ChainConfig, init: FrequencyVector | str = "stationary"
) -> dict[tuple[int, ...], int]:
    """Thinned shape counts along a chain run (stationarity testing).

    Records cfg.steps // thin shapes, one every ``thin`` down-up pairs.
    """
    rng = _rng(cfg.seed)
    if isinstance(init, str):
        f0 = sample_crp(cfg.n, cfg.p, rng)
    else:
        f0 = init
    state = _state_from_freq(f0)
    thin = cfg.effective_thin
    counts: dict[tuple[int, ...], int] = {}
    n = cfg.n
    for step in range(1, cfg.steps + 1):
        u1, u2 = rng.random(2)
        n = _down(state, n, u1)
        n = _up(state, n, cfg.p, u2)
        if step % thin == 0:
            key = _state_to_blocks(state)
            counts[key] = counts.get(key, 0) + 1
    return counts
