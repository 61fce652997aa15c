import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdmarket import (
    ConfigError,
    DataError,
    DiffusionConfig,
    PDParams,
    simulate,
    stationary_moments,
)
from pdmarket.diffusion import (
    init_sticks,
    market_step,
    sticks_to_weights,
    wf_step,
    wf_step_moment_matched,
)

P = PDParams(0.6, 55.0)


class TestConfig:
    def test_dt_stability_bound(self):
        with pytest.raises(ConfigError):
            DiffusionConfig(p=P, n_sticks=10, dt=0.1, t_end=1.0)

    def test_basic_validation(self):
        with pytest.raises(ConfigError):
            DiffusionConfig(p=P, n_sticks=0, dt=1e-4, t_end=1.0)
        with pytest.raises(ConfigError):
            DiffusionConfig(p=P, n_sticks=3, dt=-1e-4, t_end=1.0)
        with pytest.raises(ConfigError):
            DiffusionConfig(p=P, n_sticks=3, dt=1e-4, t_end=1.0, m0=0.0)

    def test_shares_validation(self):
        with pytest.raises(ConfigError):
            DiffusionConfig(
                p=P, n_sticks=3, dt=1e-4, t_end=1.0, shares=np.array([1.0, 2.0])
            )
        cfg = DiffusionConfig(
            p=P, n_sticks=2, dt=1e-4, t_end=1.0, shares=np.array([1.0, 2.0, 3.0])
        )
        assert cfg.shares.size == 2

    def test_market_scale(self):
        cfg = DiffusionConfig(p=P, n_sticks=2, dt=1e-4, t_end=1.0, m0=2.0)
        assert cfg.market_scale == pytest.approx(27.5)


class TestSteps:
    def test_wf_step_boundaries_deterministic(self):
        # at the boundaries diffusion vanishes: pure drift
        a, b, dt = 0.4, 55.6, 1e-3
        assert wf_step(0.0, a, b, dt, 0.0) == pytest.approx(0.5 * a * dt)
        assert wf_step(1.0, a, b, dt, 0.0) == pytest.approx(1 - 0.5 * b * dt)

    def test_wf_step_clamps_into_unit_interval(self):
        out = wf_step(np.array([0.01, 0.99]), 0.4, 55.6, 1e-2, np.array([-9.0, 9.0]))
        assert np.all(out >= 0.0) and np.all(out <= 1.0)

    def test_moment_matched_step_has_exact_moments(self):
        # conditional mean/variance of the step match the closed-form moments
        a, b, dt, z0 = 0.5, 3.0, 0.05, 0.2
        rng = np.random.default_rng(0)
        draws = wf_step_moment_matched(np.full(200_000, z0), a, b, dt, rng)
        lam, pi, mu = 0.5 * (a + b), a / (a + b), a + b + 1.0
        m1 = pi + (z0 - pi) * math.exp(-lam * dt)
        m2 = z0**2 * math.exp(-mu * dt) + (a + 1) * (
            pi * (1 - math.exp(-mu * dt)) / mu
            + (z0 - pi) * (math.exp(-lam * dt) - math.exp(-mu * dt)) / (lam + 1)
        )
        n = draws.size
        sd = math.sqrt(m2 - m1**2)
        assert draws.mean() == pytest.approx(m1, abs=4 * sd / math.sqrt(n))
        assert (draws**2).mean() == pytest.approx(m2, abs=5 * sd / math.sqrt(n))

    def test_market_step_stays_nonnegative(self):
        out = market_step(np.array([0.001]), 55.0, 55.0, 1e-2, np.array([-20.0]))
        assert out[0] >= 0.0


class TestStickMaps:
    def test_roundtrip_toy(self):
        x = np.array([0.5, 0.25, 0.125])
        assert np.allclose(sticks_to_weights(init_sticks(x)), x)

    def test_init_sticks_full_mass_rejected(self):
        with pytest.raises(DataError):
            init_sticks(np.array([1.0, 0.0]))

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(1e-6, 0.9), min_size=1, max_size=20))
    def test_roundtrip_property(self, z):
        z = np.array(z)
        x = sticks_to_weights(z)
        assert np.all(x >= 0) and x.sum() <= 1 + 1e-12
        assert np.allclose(init_sticks(x), z, atol=1e-9)


class TestSimulate:
    def test_deterministic_and_shaped(self):
        cfg = DiffusionConfig(p=P, n_sticks=4, dt=1e-3, t_end=0.05, seed=3)
        p1 = simulate(cfg, record_every=10)
        p2 = simulate(cfg, record_every=10)
        assert np.array_equal(p1.weights, p2.weights)
        assert np.array_equal(p1.market, p2.market)
        assert p1.weights.shape == (6, 4)
        assert p1.prices.shape == (6, 4)

    def test_prices_restore_capitalizations(self):
        q = np.array([2.0, 1.0, 4.0])
        cfg = DiffusionConfig(p=P, n_sticks=3, dt=1e-3, t_end=0.02, shares=q, seed=4)
        paths = simulate(cfg)
        caps = paths.prices * q[None, :]
        assert np.allclose(caps, paths.market[:, None] * paths.weights)

    def test_euler_scheme_runs_in_domain(self):
        cfg = DiffusionConfig(p=P, n_sticks=3, dt=1e-3, t_end=0.1, seed=5)
        paths = simulate(cfg, scheme="euler")
        assert np.all(paths.weights >= 0) and np.all(paths.weights <= 1)
        assert np.all(paths.market >= 0)

    def test_bad_scheme_and_record_every(self):
        cfg = DiffusionConfig(p=P, n_sticks=2, dt=1e-3, t_end=0.01)
        with pytest.raises(ConfigError):
            simulate(cfg, scheme="milstein")
        with pytest.raises(ConfigError):
            simulate(cfg, record_every=0)

    def test_csv_rows(self):
        cfg = DiffusionConfig(p=P, n_sticks=2, dt=1e-3, t_end=0.01, seed=6)
        rows = list(simulate(cfg, record_every=5).to_csv_rows())
        assert rows[0] == ["t", "M", "x1", "x2", "p1", "p2"]
        assert len(rows) == 4


class TestStationaryMoments:
    def test_quick_moments_beta_scheme(self):
        # small, fast configuration; full tolerances live in the acceptance gate
        p = PDParams(0.5, 10.0)
        cfg = DiffusionConfig(p=p, n_sticks=3, dt=1e-3, t_end=10.0, seed=7)
        out = stationary_moments(cfg, n_paths=128, burn_in=2.0)
        ns = np.arange(1, 4)
        a = 1 - p.alpha
        b = p.theta + p.alpha * ns
        want_mean = a / (a + b)
        want_var = a * b / ((a + b) ** 2 * (a + b + 1))
        assert np.all(np.abs(out["z_mean"] / want_mean - 1) < 0.08)
        assert np.all(np.abs(out["z_var"] / want_var - 1) < 0.15)
        assert abs(out["m_mean"] - 1.0) < 0.05

    def test_burn_in_must_leave_samples(self):
        cfg = DiffusionConfig(p=P, n_sticks=2, dt=1e-3, t_end=0.5)
        with pytest.raises(ConfigError):
            stationary_moments(cfg, n_paths=4, burn_in=1.0)
