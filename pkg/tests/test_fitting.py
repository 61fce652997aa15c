import math

import numpy as np
import pytest

from pdmarket import (
    DataError,
    DomainError,
    PDParams,
    SearchConfig,
    WeightCurve,
    average_pd_curve,
    fit_params,
    ingest_caps,
    loglog_loss,
)

SMALL_SEARCH = SearchConfig(
    alpha_grid=(0.2, 0.4, 0.6, 0.8),
    theta_grid=tuple(np.geomspace(2.0, 200.0, 8)),
    refine_rounds=2,
    n_samples=100,
)


class TestWeightCurve:
    def test_valid(self):
        WeightCurve(np.array([1, 2, 3]), np.array([0.5, 0.3, 0.2]))

    def test_rejects_mismatch(self):
        with pytest.raises(DataError):
            WeightCurve(np.array([1, 2]), np.array([0.5]))

    def test_rejects_unsorted_ranks(self):
        with pytest.raises(DataError):
            WeightCurve(np.array([2, 1]), np.array([0.5, 0.3]))

    def test_rejects_ascending_weights(self):
        with pytest.raises(DataError):
            WeightCurve(np.array([1, 2]), np.array([0.3, 0.5]))

    def test_rejects_mass_above_one(self):
        with pytest.raises(DataError):
            WeightCurve(np.array([1, 2]), np.array([0.8, 0.8]))


class TestIngest:
    def test_toy_two_rows(self):
        res = ingest_caps("A,3\nB,2\n")
        assert np.allclose(res.curve.weights, [0.6, 0.4])

    def test_single_row(self):
        res = ingest_caps("A,5\n")
        assert np.allclose(res.curve.weights, [1.0])

    def test_zero_cap_dropped_with_warning(self):
        res = ingest_caps("A,3\nB,0\nC,2\n")
        assert res.n_dropped == 1
        assert len(res.warnings) == 1
        assert res.curve.weights.size == 2

    def test_header_and_thousands_separators(self):
        res = ingest_caps("ticker,market_cap\nA,\"1,500\"\nB,500\n")
        assert np.allclose(res.curve.weights, [0.75, 0.25])

    def test_duplicates_kept_with_warning(self):
        res = ingest_caps("A,3\nA,1\n")
        assert res.n_duplicates == 1
        assert res.curve.weights.size == 2

    def test_empty_raises(self):
        with pytest.raises(DataError):
            ingest_caps("ticker,cap\n")


class TestAverageCurve:
    def test_shape_and_monotone(self):
        curve = average_pd_curve(PDParams(0.5, 5.0), 30, 100, seed=1)
        assert curve.ranks[0] == 1 and curve.ranks[-1] == 30
        assert np.all(np.diff(curve.weights) <= 0)

    def test_finite_regime_rejected(self):
        with pytest.raises(DomainError):
            average_pd_curve(PDParams(-0.5, 1.0), 10, 10)

    def test_deterministic(self):
        a = average_pd_curve(PDParams(0.4, 2.0), 20, 50, seed=2).weights
        b = average_pd_curve(PDParams(0.4, 2.0), 20, 50, seed=2).weights
        assert np.array_equal(a, b)

    def test_bad_sizes(self):
        with pytest.raises(DomainError):
            average_pd_curve(PDParams(0.5, 1.0), 0, 10)


class TestLoss:
    def test_zero_on_identical(self):
        c = average_pd_curve(PDParams(0.5, 5.0), 20, 50, seed=3)
        assert loglog_loss(c, c) == 0.0

    def test_requires_full_coverage(self):
        c = average_pd_curve(PDParams(0.5, 5.0), 20, 50, seed=3)
        longer = WeightCurve(np.arange(1, 31), np.full(30, 1 / 40))
        with pytest.raises(DataError):
            loglog_loss(c, longer)

    def test_positive_on_different(self):
        a = average_pd_curve(PDParams(0.5, 5.0), 20, 50, seed=3)
        b = average_pd_curve(PDParams(0.7, 5.0), 20, 50, seed=3)
        assert loglog_loss(a, b) > 0


class TestFit:
    def test_requires_ten_ranks(self):
        tiny = WeightCurve(np.arange(1, 6), np.geomspace(0.3, 0.05, 5))
        with pytest.raises(DataError):
            fit_params(tiny)

    def test_constant_curve_warns_not_fails(self):
        flat = WeightCurve(np.arange(1, 13), np.full(12, 1 / 24))
        res = fit_params(flat, SMALL_SEARCH, seed=0)
        assert any("weakly identified" in w for w in res.warnings)

    def test_label_invariance(self):
        curve = average_pd_curve(PDParams(0.5, 20.0), 60, 100, seed=4)
        a = fit_params(curve, SMALL_SEARCH, seed=1)
        relabeled = WeightCurve(curve.ranks, curve.weights, label="other")
        b = fit_params(relabeled, SMALL_SEARCH, seed=1)
        assert a.params == b.params and a.loss == b.loss

    def test_deterministic(self):
        curve = average_pd_curve(PDParams(0.5, 20.0), 60, 100, seed=4)
        a = fit_params(curve, SMALL_SEARCH, seed=1)
        b = fit_params(curve, SMALL_SEARCH, seed=1)
        assert a.params == b.params

    def test_quick_recovery(self):
        curve = average_pd_curve(PDParams(0.5, 20.0), 100, 200, seed=5)
        res = fit_params(curve, SMALL_SEARCH, seed=2)
        assert abs(res.params.alpha - 0.5) < 0.15
        assert 8.0 < res.params.theta < 50.0
        assert math.isfinite(res.loss)

    def test_json_payload(self):
        curve = average_pd_curve(PDParams(0.5, 20.0), 60, 100, seed=4)
        d = fit_params(curve, SMALL_SEARCH, seed=1).to_json_dict()
        assert set(d) == {
            "alpha", "theta", "loss", "n_ranks_used", "curve_samples", "warnings"
        }
