"""Averaged capital distribution curves and least-squares (alpha, theta) fits.

Model curves are rank-wise averages of ranked stick-breaking samples.  The
loss is the sum of squared residuals between log-weights at shared ranks,
i.e. least squares on the log-log plot, because observed weights span four
or more decades and a linear-space loss would see only the top ranks.

The fitter runs a coarse grid search (alpha linear, theta log-spaced)
followed by pattern-search refinement.  With common random numbers (the
default) every curve evaluation reuses one fixed uniform matrix through the
beta inverse CDF, so the loss surface is smooth in (alpha, theta) and the
whole fit is deterministic for a fixed seed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError
from .params import PDParams
from .samplers import _rng, sample_sticks_matrix

DEFAULT_ALPHA_GRID = tuple(round(0.05 * i, 2) for i in range(20))  # 0.00 .. 0.95
DEFAULT_THETA_GRID = tuple(np.geomspace(1.0, 500.0, 25))


@dataclass(frozen=True)
class WeightCurve:
    """Ranked weights indexed by 1-based rank."""

    ranks: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self):
        r = np.asarray(self.ranks, dtype=int)
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "ranks", r)
        object.__setattr__(self, "weights", w)
        if r.size != w.size:
            raise DataError("ranks and weights must have equal length")
        if r.size and (np.any(r < 1) or np.any(np.diff(r) <= 0)):
            raise DataError("ranks must be positive and strictly ascending")
        if np.any(w <= 0) or np.any(w > 1):
            raise DataError("weights must lie in (0, 1]")
        if np.any(np.diff(w) > 1e-15):
            raise DataError("weights must be descending")
        if w.sum() > 1 + 1e-9:
            raise DataError("weights must not sum to more than 1")


@dataclass(frozen=True)
class SearchConfig:
    alpha_grid: tuple = DEFAULT_ALPHA_GRID
    theta_grid: tuple = DEFAULT_THETA_GRID
    refine_rounds: int = 4
    n_samples: int = 200
    crn: bool = True


@dataclass
class FitResult:
    params: PDParams
    loss: float
    n_ranks_used: int
    curve_samples: int
    grid_trace: list[tuple[float, float, float]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.params.alpha,
            "theta": self.params.theta,
            "loss": self.loss,
            "n_ranks_used": self.n_ranks_used,
            "curve_samples": self.curve_samples,
            "warnings": self.warnings,
        }


def average_pd_curve(
    p: PDParams,
    n_ranks: int,
    n_samples: int,
    seed=0,
    uniforms: np.ndarray | None = None,
    allow_short: bool = False,
    label: str = "",
) -> WeightCurve:
    """Rank-wise average of ranked stick-breaking samples.

    Each sample is truncated at n_ranks sticks (or earlier once its residual
    falls below 1e-8); ranks that only some samples reach average the missing
    entries as zero, which is bounded by that residual.  Ranks that no sample
    reaches are an error unless ``allow_short``.
    """
    if not p.is_finite and p.alpha >= 1.0:
        raise DomainError("average curves need a valid infinite-regime alpha")
    if p.is_finite:
        raise DomainError("curve averaging is defined for the infinite regime")
    if n_ranks < 1 or n_samples < 1:
        raise DomainError("n_ranks and n_samples must be >= 1")
    x, _ = sample_sticks_matrix(p, n_samples, n_ranks, seed=seed, uniforms=uniforms)
    mean = x.mean(axis=0)
    usable = int(np.nonzero(mean > 0)[0][-1] + 1) if np.any(mean > 0) else 0
    if usable < n_ranks and not allow_short:
        raise DataError(
            f"samples cover only {usable} of the requested {n_ranks} ranks"
        )
    mean = mean[:usable]
    return WeightCurve(np.arange(1, usable + 1), mean, label=label)


def loglog_loss(model: WeightCurve, observed: WeightCurve) -> float:
    """Sum of squared log-weight residuals over the observed ranks."""
    loss, used = _loss_on_shared_ranks(model, observed)
    if used < observed.ranks.size:
        raise DataError(
            f"model covers {used} of {observed.ranks.size} observed ranks"
        )
    return loss


def _loss_on_shared_ranks(
    model: WeightCurve, observed: WeightCurve
) -> tuple[float, int]:
    max_rank = model.ranks.size  # model ranks are always 1..K
    keep = observed.ranks <= max_rank
    obs_r = observed.ranks[keep]
    obs_w = observed.weights[keep]
    mod_w = model.weights[obs_r - 1]
    res = np.log(mod_w) - np.log(obs_w)
    return float(res @ res), int(obs_r.size)


def fit_params(
    observed: WeightCurve, search: SearchConfig | None = None, seed=0
) -> FitResult:
    """Least-squares (alpha, theta) estimate for an observed ranked curve.

    Coarse grid search over SearchConfig's grids, then pattern-search
    refinement halving the steps each round.  Ties break lexicographically
    on (loss, alpha, theta) so the result is deterministic.
    """
    if search is None:
        search = SearchConfig()
    if observed.ranks.size < 10:
        raise DataError(
            f"need at least 10 observed ranks; got {observed.ranks.size}"
        )
    warnings: list[str] = []
    if float(np.ptp(observed.weights)) == 0.0:
        warnings.append("observed curve is constant; fit is weakly identified")
    n_ranks = int(observed.ranks.max())
    uniforms = None
    if search.crn:
        uniforms = _rng(seed).random((search.n_samples, n_ranks))

    cache: dict[tuple[float, float], float] = {}
    trace: list[tuple[float, float, float]] = []

    def evaluate(alpha: float, theta: float) -> float:
        key = (round(alpha, 12), round(theta, 12))
        if key in cache:
            return cache[key]
        curve = average_pd_curve(
            PDParams(alpha, theta),
            n_ranks,
            search.n_samples,
            seed=seed,
            uniforms=uniforms,
            allow_short=True,
        )
        loss, used = _loss_on_shared_ranks(curve, observed)
        if used == 0:
            loss = math.inf
        elif used < observed.ranks.size:
            # deep observed ranks below the model truncation drop out
            loss = loss * observed.ranks.size / used
        cache[key] = loss
        trace.append((alpha, theta, loss))
        return loss

    def better(a_loss, a_ab, b_loss, b_ab):
        return (a_loss, *a_ab) < (b_loss, *b_ab)

    best_ab = None
    best_loss = math.inf
    for a in search.alpha_grid:
        for t in search.theta_grid:
            loss = evaluate(float(a), float(t))
            if better(loss, (a, t), best_loss, best_ab or (math.inf, math.inf)):
                best_loss, best_ab = loss, (float(a), float(t))

    a_lo, a_hi = min(search.alpha_grid), max(search.alpha_grid)
    t_lo, t_hi = min(search.theta_grid), max(search.theta_grid)
    da = (a_hi - a_lo) / max(len(search.alpha_grid) - 1, 1)
    dlt = (
        math.log(t_hi / t_lo) / max(len(search.theta_grid) - 1, 1)
        if t_hi > t_lo
        else 0.25
    )
    a, t = best_ab
    for _ in range(search.refine_rounds):
        da *= 0.5
        dlt *= 0.5
        improved = True
        while improved:
            improved = False
            for na, nt in (
                (a + da, t),
                (a - da, t),
                (a, t * math.exp(dlt)),
                (a, t * math.exp(-dlt)),
            ):
                if not (a_lo <= na <= a_hi) or nt <= 0:
                    continue
                loss = evaluate(na, nt)
                if better(loss, (na, nt), best_loss, (a, t)):
                    best_loss, (a, t) = loss, (na, nt)
                    improved = True
    return FitResult(
        params=PDParams(a, t),
        loss=best_loss,
        n_ranks_used=int(observed.ranks.size),
        curve_samples=search.n_samples,
        grid_trace=trace,
        warnings=warnings,
    )


@dataclass
class IngestResult:
    curve: WeightCurve
    n_dropped: int = 0
    n_duplicates: int = 0

    @property
    def warnings(self) -> list[str]:
        out = []
        if self.n_dropped:
            out.append(f"dropped {self.n_dropped} unusable row(s)")
        if self.n_duplicates:
            out.append(f"kept {self.n_duplicates} duplicate ticker(s)")
        return out


def ingest_caps(source, label: str = "caps") -> IngestResult:
    """Parse (ticker, market_cap) CSV rows into a normalized weight curve.

    Accepts an optional header, strips thousands separators from the cap
    column, drops non-positive or unparseable rows (counted), and keeps
    duplicate tickers since only the capitalizations matter.
    """
    if isinstance(source, (str, bytes)):
        source = io.StringIO(
            source.decode() if isinstance(source, bytes) else source
        )
    reader = csv.reader(source)
    caps: list[float] = []
    seen: set[str] = set()
    n_dropped = 0
    n_duplicates = 0
    for i, row in enumerate(reader):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < 2:
            n_dropped += 1
            continue
        ticker = row[0].strip()
        raw = row[1].strip().replace(",", "").replace("_", "")
        try:
            cap = float(raw)
        except ValueError:
            if i == 0:
                continue  # header row
            n_dropped += 1
            continue
        if cap <= 0 or not math.isfinite(cap):
            n_dropped += 1
            continue
        if ticker in seen:
            n_duplicates += 1
        seen.add(ticker)
        caps.append(cap)
    if not caps:
        raise DataError("no usable capitalization rows in input")
    v = np.array(caps)
    w = -np.sort(-v, kind="stable") / math.fsum(caps)
    curve = WeightCurve(np.arange(1, w.size + 1), w, label=label)
    return IngestResult(curve, n_dropped, n_duplicates)
