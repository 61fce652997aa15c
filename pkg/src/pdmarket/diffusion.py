"""Wright-Fisher stick diffusions, market-cap diffusion, and restored prices.

The stick processes Z_n solve

    dZ_n = 1/2 [ (1-alpha)(1-Z_n) - (theta + alpha*n) Z_n ] dt
           + sqrt(Z_n (1-Z_n)) dB_n

with stationary Beta(1-alpha, theta+alpha*n) marginals; weights follow by
stick-breaking X_n = Z_n (1 - sum_{i<n} X_i).  Total market value M solves
dM = 1/2 (theta - c M) dt + sqrt(M) dB with stationary Gamma(theta, c), and
prices restore as P_n = M X_n / q_n.

Integration is Euler-Maruyama with full truncation: the diffusion coefficient
is evaluated on the state clamped into the domain and the result is clamped
back, which keeps every path inside [0, 1] (sticks) and [0, inf) (market).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .params import PDParams
from .samplers import TruncationRule, _rng, sample_sticks_size_biased

_NOISE_BLOCK = 8192


@dataclass(frozen=True)
class DiffusionConfig:
    p: PDParams
    n_sticks: int
    dt: float
    t_end: float
    m0: float = 1.0
    shares: np.ndarray | None = None  # default: one share per stock
    x0: object = "stationary"  # RankedWeights-like or "stationary"
    seed: int = 0

    def __post_init__(self):
        if self.n_sticks < 1:
            raise ConfigError(f"n_sticks must be >= 1; got {self.n_sticks}")
        if self.dt <= 0 or self.t_end < 0:
            raise ConfigError("dt must be positive and t_end non-negative")
        if self.m0 <= 0:
            raise ConfigError(f"m0 must be positive; got {self.m0}")
        bound = 1.0 / (self.p.theta + self.p.alpha * self.n_sticks + 1.0)
        if self.dt >= bound:
            raise ConfigError(
                f"dt={self.dt} is unstable for these parameters; "
                f"use dt < {bound:.3g}"
            )
        if self.shares is not None:
            q = np.asarray(self.shares, dtype=float)
            if q.size < self.n_sticks or np.any(q[: self.n_sticks] <= 0):
                raise ConfigError(
                    f"need >= {self.n_sticks} strictly positive share counts"
                )
            object.__setattr__(self, "shares", q[: self.n_sticks])

    @property
    def market_scale(self) -> float:
        """Mean-reversion scale c, fixed by E[M*] = theta / c = m0."""
        return self.p.theta / self.m0


@dataclass
class PricePaths:
    times: np.ndarray
    weights: np.ndarray  # (records, K)
    market: np.ndarray  # (records,)
    prices: np.ndarray  # (records, K)

    def to_csv_rows(self):
        k = self.weights.shape[1]
        yield (
            ["t", "M"]
            + [f"x{i + 1}" for i in range(k)]
            + [f"p{i + 1}" for i in range(k)]
        )
        for t, m, x, pr in zip(self.times, self.market, self.weights, self.prices):
            yield (
                [f"{t:.10g}", f"{m:.10g}"]
                + [f"{v:.10g}" for v in x]
                + [f"{v:.10g}" for v in pr]
            )


def wf_step(z, a: float, b: float, dt: float, noise):
    """One full-truncation Euler-Maruyama step of the Wright-Fisher SDE.

    Works elementwise on arrays; a and b may be arrays of matching shape.
    """
    zc = np.clip(z, 0.0, 1.0)
    drift = 0.5 * (a * (1.0 - zc) - b * zc)
    diff = np.sqrt(zc * (1.0 - zc) * dt)
    return np.clip(zc + drift * dt + diff * noise, 0.0, 1.0)


def wf_step_moment_matched(z, a, b, dt: float, rng):
    """One Wright-Fisher step via a Beta draw matching exact moments.

    The first two conditional moments of the Wright-Fisher diffusion obey a
    closed linear ODE system, so both are available exactly over any dt; the
    step samples a Beta with those moments.  Unlike the clamped Euler step,
    this preserves the stationary mean and variance exactly, which matters
    for sticks whose Beta(1-alpha, theta+alpha*n) marginal spikes at 0.
    """
    z = np.clip(z, 0.0, 1.0)
    lam = 0.5 * (a + b)
    pi = a / (a + b)
    mu = a + b + 1.0
    e_lam = np.exp(-lam * dt)
    e_mu = np.exp(-mu * dt)
    m1 = pi + (z - pi) * e_lam
    m2 = z * z * e_mu + (a + 1.0) * (
        pi * (1.0 - e_mu) / mu + (z - pi) * (e_lam - e_mu) / (lam + 1.0)
    )
    var = np.maximum(m2 - m1 * m1, 1e-300)
    nu = np.maximum(m1 * (1.0 - m1) / var - 1.0, 1e-12)
    return rng.beta(m1 * nu, (1.0 - m1) * nu)


def market_step(m, theta: float, c: float, dt: float, noise):
    """One Euler-Maruyama step of dM = (theta - cM)/2 dt + sqrt(M) dB, M >= 0."""
    mc = np.maximum(m, 0.0)
    return np.maximum(
        mc + 0.5 * (theta - c * mc) * dt + np.sqrt(mc * dt) * noise, 0.0
    )


def init_sticks(x0) -> np.ndarray:
    """Recover stick variables from initial weights: Z_n = X_n / (1 - sum_{i<n} X_i)."""
    x = np.asarray(getattr(x0, "weights", x0), dtype=float)
    z = np.empty(x.size)
    rem = 1.0
    for i, xi in enumerate(x):
        if rem <= 1e-12:
            raise DataError(
                f"partial weight sum reaches 1 before index {i}; "
                "cannot define the remaining sticks"
            )
        z[i] = xi / rem
        rem -= xi
    if np.any(z < 0) or np.any(z > 1 + 1e-12):
        raise DataError("initial weights are not a valid stick-breaking prefix")
    return np.clip(z, 0.0, 1.0)


def sticks_to_weights(z) -> np.ndarray:
    """Stick-breaking map: X_1 = Z_1, X_n = Z_n (1 - sum_{i<n} X_i)."""
    z = np.asarray(z, dtype=float)
    rems = np.cumprod(1.0 - z)
    x = z * np.concatenate(([1.0], rems[:-1]))
    return x


def _initial_state(cfg: DiffusionConfig, rng) -> np.ndarray:
    if isinstance(cfg.x0, str):
        if cfg.x0 != "stationary":
            raise ConfigError(f"unknown x0: {cfg.x0!r}")
        rw = sample_sticks_size_biased(
            cfg.p, TruncationRule(top_ranks=cfg.n_sticks), seed=rng
        )
        w = rw.weights[: cfg.n_sticks]
        if w.size < cfg.n_sticks:
            w = np.concatenate([w, np.zeros(cfg.n_sticks - w.size)])
        return init_sticks(w)
    return init_sticks(cfg.x0)


def _stick_rates(cfg: DiffusionConfig) -> tuple[float, np.ndarray]:
    ns = np.arange(1, cfg.n_sticks + 1, dtype=float)
    return 1.0 - cfg.p.alpha, cfg.p.theta + cfg.p.alpha * ns


def simulate(
    cfg: DiffusionConfig, record_every: int = 1, scheme: str = "beta"
) -> PricePaths:
    """Integrate sticks and market value; record every ``record_every`` steps.

    ``scheme="beta"`` advances sticks by the moment-matched Beta step (one
    shared stick stream, one market stream); ``scheme="euler"`` uses the
    clamped Euler step with one independent normal stream per stick plus one
    for M, so sticks could be advanced in parallel without changing paths.
    """
    if record_every < 1:
        raise ConfigError(f"record_every must be >= 1; got {record_every}")
    if scheme not in ("beta", "euler"):
        raise ConfigError(f"unknown scheme: {scheme!r}")
    K = cfg.n_sticks
    seq = np.random.SeedSequence(cfg.seed)
    init_rng = np.random.default_rng(seq.spawn(1)[0])
    streams = [np.random.default_rng(s) for s in seq.spawn(K + 1)]
    z = _initial_state(cfg, init_rng)
    a, b = _stick_rates(cfg)
    c = cfg.market_scale
    theta = cfg.p.theta
    q = cfg.shares if cfg.shares is not None else np.ones(K)
    m = cfg.m0
    n_steps = int(round(cfg.t_end / cfg.dt))
    rec_t, rec_x, rec_m = [0.0], [sticks_to_weights(z)], [m]
    step = 0
    while step < n_steps:
        block = min(_NOISE_BLOCK, n_steps - step)
        if scheme == "euler":
            noise = np.empty((block, K + 1))
            for i, s in enumerate(streams):
                noise[:, i] = s.standard_normal(block)
        else:
            noise = streams[K].standard_normal((block, 1))
        for j in range(block):
            if scheme == "euler":
                z = wf_step(z, a, b, cfg.dt, noise[j, :K])
                m_noise = noise[j, K]
            else:
                z = wf_step_moment_matched(z, a, b, cfg.dt, streams[0])
                m_noise = noise[j, 0]
            m = market_step(m, theta, c, cfg.dt, m_noise)
            step += 1
            if step % record_every == 0:
                rec_t.append(step * cfg.dt)
                rec_x.append(sticks_to_weights(z))
                rec_m.append(m)
    times = np.array(rec_t)
    weights = np.array(rec_x)
    market = np.array(rec_m)
    prices = market[:, None] * weights / q[None, :]
    return PricePaths(times, weights, market, prices)


def stationary_moments(
    cfg: DiffusionConfig,
    n_paths: int = 128,
    burn_in: float | None = None,
    scheme: str = "beta",
) -> dict[str, np.ndarray | float]:
    """Long-run moment estimates from an ensemble of independent paths.

    Runs ``n_paths`` replicas (independent seeds spawned from cfg.seed) for
    cfg.t_end each, discarding ``burn_in`` time units (default: 20 over the
    slowest stick's reversion rate), and pools time-and-ensemble averages.
    """
    if scheme not in ("beta", "euler"):
        raise ConfigError(f"unknown scheme: {scheme!r}")
    K = cfg.n_sticks
    a, b = _stick_rates(cfg)
    c = cfg.market_scale
    theta = cfg.p.theta
    if burn_in is None:
        burn_in = 20.0 / float(min(0.5 * (a + b.min()), 0.5 * c))
    if burn_in >= cfg.t_end:
        raise ConfigError(
            f"t_end={cfg.t_end} leaves nothing after burn_in={burn_in:.3g}"
        )
    seq = np.random.SeedSequence(cfg.seed)
    init_rng = np.random.default_rng(seq.spawn(1)[0])
    rng = np.random.default_rng(seq.spawn(2)[1])
    z = np.tile(_initial_state(cfg, init_rng), (n_paths, 1))
    m = np.full(n_paths, cfg.m0)
    n_steps = int(round(cfg.t_end / cfg.dt))
    skip = int(round(burn_in / cfg.dt))
    s1 = np.zeros(K)
    s2 = np.zeros(K)
    m1 = 0.0
    m2 = 0.0
    count = 0
    for step in range(n_steps):
        if scheme == "euler":
            noise = rng.standard_normal((n_paths, K + 1))
            z = wf_step(z, a, b[None, :], cfg.dt, noise[:, :K])
            m_noise = noise[:, K]
        else:
            z = wf_step_moment_matched(z, a, b[None, :], cfg.dt, rng)
            m_noise = rng.standard_normal(n_paths)
        m = market_step(m, theta, c, cfg.dt, m_noise)
        if step >= skip:
            s1 += z.sum(axis=0)
            s2 += (z * z).sum(axis=0)
            m1 += m.sum()
            m2 += (m * m).sum()
            count += n_paths
    z_mean = s1 / count
    z_var = s2 / count - z_mean**2
    m_mean = m1 / count
    return {
        "z_mean": z_mean,
        "z_var": z_var,
        "m_mean": m_mean,
        "m_var": m2 / count - m_mean**2,
        "samples": count,
    }
