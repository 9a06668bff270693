import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cexpect.quantreg as qr
from cexpect import (
    CoefficientProcess,
    CovariateProfile,
    DidNotConverge,
    DimensionMismatch,
    InvalidLevel,
    LevelOutOfMeshRange,
    QuantileLevel,
    RankDeficient,
    fit_process,
    fit_quantile_regression,
    pinball_loss,
    predict_quantile,
)
from oracles import brute_force_intercept, grid_search_intercept


class TestPinballLoss:
    def test_direct_evaluation(self):
        assert pinball_loss([2, -1], 0.9) == pytest.approx(1.9, abs=1e-12)

    def test_zero_residuals(self):
        for tau in (0.1, 0.5, 0.99):
            assert pinball_loss([0, 0, 0], tau) == 0.0

    def test_symmetric_case(self):
        assert pinball_loss([1, -1], 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            pinball_loss([1.0, np.nan], 0.5)

    @settings(max_examples=100)
    @given(
        st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=20),
        st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=20),
        st.floats(0.01, 0.99),
    )
    def test_convex_in_residuals(self, a, b, tau):
        m = min(len(a), len(b))
        ra, rb = np.array(a[:m]), np.array(b[:m])
        mid = pinball_loss((ra + rb) / 2, tau)
        avg = (pinball_loss(ra, tau) + pinball_loss(rb, tau)) / 2
        assert mid <= avg + 1e-9 * (1 + avg)

    def test_nonnegative_and_zero_only_at_zero(self):
        assert pinball_loss([0.1], 0.5) > 0
        assert pinball_loss([-0.1], 0.5) > 0


def ones_design(n):
    return np.ones((n, 1))


class TestFitQuantileRegression:
    def test_median_of_three(self):
        fit = fit_quantile_regression(ones_design(3), np.array([1.0, 2.0, 3.0]), 0.5)
        assert fit.beta[0] == pytest.approx(2.0, abs=1e-12)

    def test_upper_quantile_two_points(self):
        y = np.array([0.0, 10.0])
        fit = fit_quantile_regression(ones_design(2), y, 0.9)
        beta_ref, loss_ref = grid_search_intercept(y, 0.9, 0.0, 10.0, 0.01)
        assert fit.beta[0] == pytest.approx(10.0, abs=1e-9)
        assert fit.beta[0] == pytest.approx(beta_ref, abs=0.01)
        assert fit.achieved_loss <= loss_ref + 1e-9

    def test_exact_line_interpolation(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=30)
        X = np.column_stack([np.ones(30), x])
        y = 4.0 - 2.5 * x
        for tau in (0.1, 0.5, 0.9):
            fit = fit_quantile_regression(X, y, tau)
            assert fit.achieved_loss <= 1e-9
            assert np.allclose(fit.beta, [4.0, -2.5], atol=1e-7)

    def test_achieved_loss_matches_beta(self):
        rng = np.random.default_rng(3)
        X = np.column_stack([np.ones(50), rng.normal(size=50)])
        y = rng.normal(size=50)
        fit = fit_quantile_regression(X, y, 0.3)
        assert fit.achieved_loss == pytest.approx(
            pinball_loss(y - X @ fit.beta, 0.3), rel=1e-12
        )

    def test_accepts_quantile_level_objects(self):
        y = np.array([1.0, 2.0, 3.0])
        a = fit_quantile_regression(ones_design(3), y, QuantileLevel(0.5))
        b = fit_quantile_regression(ones_design(3), y, 0.5)
        assert a.beta[0] == b.beta[0]

    @pytest.mark.parametrize("tau", [0.0, 1.0, -0.2, 1.7])
    def test_invalid_level(self, tau):
        with pytest.raises(InvalidLevel):
            fit_quantile_regression(ones_design(3), np.array([1.0, 2.0, 3.0]), tau)

    def test_rank_deficient_duplicate_column(self):
        x = np.arange(6, dtype=float)
        X = np.column_stack([np.ones(6), x, x])
        with pytest.raises(RankDeficient):
            fit_quantile_regression(X, np.arange(6, dtype=float), 0.5)

    def test_more_parameters_than_rows(self):
        with pytest.raises(RankDeficient):
            fit_quantile_regression(np.ones((2, 3)), np.array([1.0, 2.0]), 0.5)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            fit_quantile_regression(np.ones((3, 1)), np.array([1.0, 2.0]), 0.5)


class TestBruteForceOptimality:
    """Intercept-only optima always sit on an observed value, so an
    exhaustive scan over the observations is an exact reference."""

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=-100, max_value=100, allow_nan=False),
            min_size=1,
            max_size=12,
        ),
        st.sampled_from([0.1, 0.25, 0.5, 0.75, 0.9]),
    )
    def test_matches_exhaustive_scan(self, ys, tau):
        y = np.array(ys)
        fit = fit_quantile_regression(ones_design(y.size), y, tau)
        assert fit.achieved_loss <= brute_force_intercept(y, tau) + 1e-6

    def test_integer_ties(self):
        rng = np.random.default_rng(9)
        for trial in range(25):
            y = rng.integers(0, 4, size=rng.integers(3, 12)).astype(float)
            tau = rng.uniform(0.05, 0.95)
            fit = fit_quantile_regression(ones_design(y.size), y, tau)
            assert fit.achieved_loss <= brute_force_intercept(y, tau) + 1e-9


def sign_counts(y, X, beta, tau):
    r = y - X @ beta
    ztol = 1e-8 * (1.0 + float(np.max(np.abs(y))))
    return int(np.sum(r < -ztol)), int(np.sum(r <= ztol))


class TestFitProperty:
    @pytest.mark.parametrize("seed", range(8))
    def test_sign_counts_continuous(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(20, 120))
        X = np.column_stack([np.ones(n), rng.normal(size=(n, 2))])
        y = X @ np.array([1.0, 2.0, -1.0]) + rng.standard_t(3, size=n)
        tau = float(rng.uniform(0.05, 0.95))
        fit = fit_quantile_regression(X, y, tau)
        neg, nonpos = sign_counts(y, X, fit.beta, tau)
        assert neg <= n * tau + 1e-9
        assert nonpos >= n * tau - 1e-9

    @pytest.mark.parametrize("seed", range(8))
    def test_sign_counts_heavy_ties(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(20, 120))
        x = rng.integers(0, 3, size=n).astype(float)
        X = np.column_stack([np.ones(n), x])
        y = rng.poisson(2.0 + x, size=n).astype(float)
        tau = float(rng.uniform(0.1, 0.9))
        fit = fit_quantile_regression(X, y, tau)
        neg, nonpos = sign_counts(y, X, fit.beta, tau)
        assert neg <= n * tau + 1e-9
        assert nonpos >= n * tau - 1e-9


class TestDualRoute:
    """The polished solution must match an LP solved independently."""

    @pytest.mark.parametrize("seed", range(6))
    def test_loss_matches_linear_program(self, seed):
        rng = np.random.default_rng(200 + seed)
        n = int(rng.integers(15, 60))
        X = np.column_stack([np.ones(n), rng.normal(size=(n, 1))])
        y = rng.exponential(2.0, size=n)
        tau = float(rng.uniform(0.1, 0.9))
        fit = fit_quantile_regression(X, y, tau)
        beta_lp = qr._dual_lp(X, y, tau)
        loss_lp = pinball_loss(y - X @ beta_lp, tau)
        assert fit.achieved_loss <= loss_lp + 1e-6 * (1 + loss_lp)


class TestEquivariance:
    def test_scale_and_shift(self):
        rng = np.random.default_rng(4)
        n = 60
        X = np.column_stack([np.ones(n), rng.normal(size=n)])
        y = rng.gamma(2.0, size=n)
        for tau in (0.2, 0.5, 0.8):
            base = fit_quantile_regression(X, y, tau).beta
            scaled = fit_quantile_regression(X, 3.5 * y, tau).beta
            assert np.allclose(scaled, 3.5 * base, rtol=1e-6, atol=1e-8)
            c = np.array([1.0, -2.0])
            shifted = fit_quantile_regression(X, y + X @ c, tau).beta
            assert np.allclose(shifted, base + c, rtol=1e-6, atol=1e-8)


class TestFitProcess:
    def test_quartiles_match_order_statistics(self):
        y = np.arange(1.0, 101.0)
        proc = fit_process(ones_design(100), y, [0.25, 0.5, 0.75])
        assert np.allclose(proc.betas[:, 0], [25.0, 50.0, 75.0])

    def test_singleton_equals_lone_fit(self):
        rng = np.random.default_rng(5)
        X = np.column_stack([np.ones(40), rng.normal(size=40)])
        y = rng.normal(size=40)
        proc = fit_process(X, y, [0.5])
        lone = fit_quantile_regression(X, y, 0.5)
        assert np.array_equal(proc.betas[0], lone.beta)

    def test_location_shift_slope_recovery(self):
        rng = np.random.default_rng(6)
        n = 10000
        x = rng.normal(size=n)
        X = np.column_stack([np.ones(n), x])
        y = 2.0 + 3.0 * x + rng.logistic(size=n)
        proc = fit_process(X, y, [0.1, 0.3, 0.5, 0.7, 0.9])
        assert np.all(np.abs(proc.betas[:, 1] - 3.0) < 0.1)

    def test_repeat_runs_bitwise_identical(self):
        rng = np.random.default_rng(7)
        X = np.column_stack([np.ones(80), rng.normal(size=80)])
        y = rng.normal(size=80)
        levels = np.linspace(0.05, 0.95, 19)
        a = fit_process(X, y, levels)
        b = fit_process(X, y, levels)
        assert np.array_equal(a.betas, b.betas)

    def test_levels_must_increase(self):
        with pytest.raises(InvalidLevel):
            fit_process(ones_design(5), np.arange(5.0), [0.5, 0.5])
        with pytest.raises(InvalidLevel):
            fit_process(ones_design(5), np.arange(5.0), [0.7, 0.3])

    def test_errors_annotated_with_level(self, monkeypatch):
        def explode(X, y, tau):
            raise DidNotConverge("stub failure")

        monkeypatch.setattr(qr, "_solve", explode)
        X = np.column_stack([np.ones(10), np.arange(10.0)])
        with pytest.raises(DidNotConverge, match="level 0.25"):
            fit_process(X, np.arange(10.0), [0.25, 0.75])


class TestPredictQuantile:
    def test_constant_process(self):
        proc = CoefficientProcess(np.array([0.25, 0.5, 0.75]), np.tile([2.0, 3.0], (3, 1)))
        x = CovariateProfile(np.array([1.0, 4.0]))
        for tau in (0.25, 0.4, 0.75):
            assert predict_quantile(proc, x, tau) == pytest.approx(14.0)

    def test_intercept_only_median(self):
        y = np.array([3.0, 1.0, 2.0])
        proc = fit_process(ones_design(3), y, [0.25, 0.5, 0.75])
        assert predict_quantile(proc, np.array([1.0]), 0.5) == 2.0

    def test_zero_profile(self):
        proc = CoefficientProcess(np.array([0.5]), np.array([[5.0, 7.0]]))
        assert predict_quantile(proc, np.zeros(2), 0.5) == 0.0

    def test_nearest_level_tie_takes_lower(self):
        proc = CoefficientProcess(np.array([0.4, 0.6]), np.array([[1.0], [2.0]]))
        assert predict_quantile(proc, np.array([1.0]), 0.5) == 1.0
        assert predict_quantile(proc, np.array([1.0]), 0.55) == 2.0

    def test_out_of_mesh_range(self):
        proc = CoefficientProcess(np.array([0.4, 0.6]), np.array([[1.0], [2.0]]))
        with pytest.raises(LevelOutOfMeshRange):
            predict_quantile(proc, np.array([1.0]), 0.2)
        with pytest.raises(LevelOutOfMeshRange):
            predict_quantile(proc, np.array([1.0]), 0.7)

    def test_profile_length_checked(self):
        proc = CoefficientProcess(np.array([0.5]), np.array([[5.0, 7.0]]))
        with pytest.raises(DimensionMismatch):
            predict_quantile(proc, np.array([1.0]), 0.5)
