import math

import numpy as np
import pytest

from pdmarket import (
    ChainConfig,
    ConfigError,
    FrequencyVector,
    PDParams,
    down_step,
    run_chain,
    up_step,
)
from pdmarket.duchain import chain_class_counts
from pdmarket.errors import StateError
from pdmarket.exact import psf_log_prob
from pdmarket.partitions import enumerate_classes, class_to_freq, freq_to_class

P = PDParams(0.5, 1.0)


class TestSteps:
    def test_down_removes_one_box(self):
        f = FrequencyVector((3, 2, 1))
        g = down_step(f, seed=0)
        assert g.n == f.n - 1

    def test_down_of_empty_raises(self):
        with pytest.raises(StateError):
            down_step(FrequencyVector())

    def test_up_adds_one_box(self):
        f = FrequencyVector((3, 2, 1))
        g = up_step(f, P, seed=0)
        assert g.n == f.n + 1

    def test_up_from_empty(self):
        assert up_step(FrequencyVector(), P).blocks == (1,)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            ChainConfig(n=0, p=P, steps=1)
        with pytest.raises(ConfigError):
            ChainConfig(n=3, p=P, steps=-1)
        with pytest.raises(ConfigError):
            ChainConfig(n=3, p=P, steps=1, record_top=0)
        with pytest.raises(ConfigError):
            ChainConfig(n=3, p=P, steps=1, thin=0)

    def test_default_thin_is_one_sweep(self):
        assert ChainConfig(n=7, p=P, steps=1).effective_thin == 7


class TestRunChain:
    def test_shapes_and_determinism(self):
        cfg = ChainConfig(n=8, p=P, steps=64, record_top=3, seed=5)
        t1 = run_chain(cfg)
        t2 = run_chain(cfg)
        assert np.array_equal(t1.series, t2.series)
        assert t1.series.shape == (64 // 8 + 1, 3)
        assert np.array_equal(t1.times, np.arange(0, 65, 8))
        # recorded rows are descending normalized weights summing to <= 1
        assert np.all(np.diff(t1.series, axis=1) <= 0)
        assert np.all(t1.series.sum(axis=1) <= 1 + 1e-12)

    def test_explicit_init(self):
        f0 = FrequencyVector((4, 4))
        traj = run_chain(ChainConfig(n=8, p=P, steps=8, seed=1), init=f0)
        assert traj.series[0, 0] == pytest.approx(0.5)

    def test_init_size_mismatch(self):
        with pytest.raises(ConfigError):
            run_chain(ChainConfig(n=8, p=P, steps=8), init=FrequencyVector((3,)))

    def test_csv_rows(self):
        traj = run_chain(ChainConfig(n=4, p=P, steps=8, record_top=2, seed=2))
        rows = list(traj.to_csv_rows())
        assert rows[0] == ["step", "x1", "x2"]
        assert len(rows) == 4


def test_chain_preserves_exact_law():
    # thinned records from the stationary start match the exact law (5 sigma)
    n, records = 4, 20_000
    cfg = ChainConfig(n=n, p=P, steps=records * n, seed=3)
    counts = chain_class_counts(cfg)
    total = sum(counts.values())
    assert total == records
    for c in enumerate_classes(n):
        want = math.exp(psf_log_prob(c, P))
        got = counts.get(class_to_freq(c).blocks, 0) / total
        se = math.sqrt(want * (1 - want) / total)
        # thinning by n leaves some autocorrelation; allow a widened band
        assert abs(got - want) < 5 * se + 0.003, c
