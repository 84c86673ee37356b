import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynconn import base_measure as bm
from dynconn.errors import ValidationError

params_strategy = st.builds(
    bm.BaseMeasureParams,
    gamma_bar=st.floats(min_value=-3, max_value=3),
    sigma2_gamma=st.floats(min_value=1e-3, max_value=1e3),
    sigma2_delta=st.floats(min_value=1e-3, max_value=1e3),
    rho=st.floats(min_value=-0.99, max_value=0.99),
    T=st.integers(min_value=1, max_value=12),
)


class TestParams:
    def test_rw_limit_allowed(self):
        bm.BaseMeasureParams(0.0, 1.0, 1.0, 1.0, 5)

    @pytest.mark.parametrize("rho", [1.001, -1.0, 2.0])
    def test_bad_rho_rejected(self, rho):
        with pytest.raises(ValidationError):
            bm.BaseMeasureParams(0.0, 1.0, 1.0, rho, 5)

    def test_negative_variance_rejected(self):
        with pytest.raises(ValidationError):
            bm.BaseMeasureParams(0.0, -1.0, 1.0, 0.5, 5)


class TestMean:
    def test_zero_mean(self):
        p = bm.BaseMeasureParams(0.0, 1.0, 1.0, 0.7, 6)
        assert np.all(bm.ar1_mean(p) == 0.0)

    def test_rho_zero(self):
        p = bm.BaseMeasureParams(2.0, 1.0, 1.0, 0.0, 3)
        np.testing.assert_array_equal(bm.ar1_mean(p), [2.0, 0.0, 0.0])

    def test_geometric_decay(self):
        p = bm.BaseMeasureParams(1.0, 1.0, 1.0, 0.5, 4)
        np.testing.assert_allclose(bm.ar1_mean(p), [1.0, 0.5, 0.25, 0.125])


class TestCovariance:
    def test_rho_zero_is_diagonal(self):
        p = bm.BaseMeasureParams(0.0, 2.0, 3.0, 0.0, 4)
        np.testing.assert_array_equal(bm.ar1_covariance(p), np.diag([2.0, 3.0, 3.0, 3.0]))

    def test_first_entry_always_sigma2_gamma(self):
        for rho in (-0.9, 0.0, 0.5, 1.0):
            p = bm.BaseMeasureParams(0.0, 1.7, 0.3, rho, 5)
            assert bm.ar1_covariance(p)[0, 0] == pytest.approx(1.7)

    def test_stationary_choice_identity(self):
        # with sigma2_gamma = sigma2_delta/(1-rho^2) the law is stationary:
        # Sigma_st = rho^{|t-s|} sigma2_delta / (1 - rho^2)
        for rho in (-0.9, -0.3, 0.2, 0.5, 0.8, 0.95):
            for s2d in (0.1, 1.0, 10.0):
                T = 8
                p = bm.BaseMeasureParams(0.0, s2d / (1 - rho**2), s2d, rho, T)
                cov = bm.ar1_covariance(p)
                s = np.arange(T)
                expected = rho ** np.abs(np.subtract.outer(s, s)) * s2d / (1 - rho**2)
                np.testing.assert_allclose(cov, expected, atol=1e-12)

    def test_rw_limit(self):
        p = bm.BaseMeasureParams(0.0, 2.0, 0.5, 1.0, 5)
        cov = bm.ar1_covariance(p)
        s = np.arange(1, 6)
        expected = 2.0 + 0.5 * (np.minimum.outer(s, s) - 1)
        np.testing.assert_array_equal(cov, expected)

    def test_rw_limit_is_continuous_in_rho(self):
        p_lim = bm.BaseMeasureParams(0.0, 1.0, 1.0, 1.0, 6)
        p_near = bm.BaseMeasureParams(0.0, 1.0, 1.0, 1 - 1e-9, 6)
        np.testing.assert_allclose(
            bm.ar1_covariance(p_near), bm.ar1_covariance(p_lim), rtol=1e-5
        )

    @pytest.mark.parametrize("rho", [-0.999, -0.5, 0.0, 0.5, 0.999, 1.0])
    @pytest.mark.parametrize("s2", [1e-4, 1.0, 1e4])
    def test_symmetric_and_positive_definite(self, rho, s2):
        p = bm.BaseMeasureParams(0.0, s2, s2, rho, 50)
        cov = bm.ar1_covariance(p)
        np.testing.assert_array_equal(cov, cov.T)
        np.linalg.cholesky(cov)

    def test_large_T_cholesky(self):
        p = bm.BaseMeasureParams(0.0, 1.0, 0.01, 0.999, 300)
        np.linalg.cholesky(bm.ar1_covariance(p))

    def test_banded_precision_inverts_covariance(self):
        p = bm.BaseMeasureParams(0.3, 1.1, 0.4, 0.6, 7)
        ab = bm.ar1_precision_banded(p)
        Q = np.diag(ab[0]) + np.diag(ab[1, :-1], 1) + np.diag(ab[1, :-1], -1)
        np.testing.assert_allclose(Q @ bm.ar1_covariance(p), np.eye(7), atol=1e-12)

    def test_logdet_matches_dense(self):
        p = bm.BaseMeasureParams(0.0, 2.3, 0.7, 0.4, 9)
        sign, logdet = np.linalg.slogdet(bm.ar1_covariance(p))
        assert sign == 1.0
        assert bm.ar1_logdet_cov(p) == pytest.approx(logdet)

    def test_nonstationary_to_stationary_decay(self):
        # far from the start, mean decays to 0 and covariances approach the
        # stationary AR(1) values
        rho, s2d = 0.6, 0.8
        p = bm.BaseMeasureParams(1.5, 4.0, s2d, rho, 210)
        mean = bm.ar1_mean(p)
        cov = bm.ar1_covariance(p)
        s = 200  # 1-based index 200
        assert abs(mean[s - 1]) < 1e-6
        for k in range(5):
            stat = rho**k * s2d / (1 - rho**2)
            assert cov[s - 1, s - 1 + k] == pytest.approx(stat, rel=1e-6)


class TestLogDensity:
    def test_T1_is_univariate_normal(self):
        p = bm.BaseMeasureParams(0.5, 2.0, 1.0, 0.3, 1)
        got = bm.log_density(np.array([1.2]), p)
        expected = -0.5 * np.log(2 * np.pi * 2.0) - 0.5 * (1.2 - 0.5) ** 2 / 2.0
        assert got == pytest.approx(expected)

    def test_maximized_at_mean(self):
        p = bm.BaseMeasureParams(0.8, 1.0, 0.5, 0.7, 5)
        mode = bm.ar1_mean(p)
        at_mode = bm.log_density(mode, p)
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert bm.log_density(mode + 0.1 * rng.standard_normal(5), p) < at_mode

    @settings(max_examples=200, deadline=None)
    @given(params=params_strategy, data=st.data())
    def test_matches_sequential_factorization(self, params, data):
        gamma = np.array(
            data.draw(
                st.lists(
                    st.floats(min_value=-10, max_value=10),
                    min_size=params.T,
                    max_size=params.T,
                )
            )
        )
        dense = bm.log_density(gamma, params)
        seq = -0.5 * np.log(2 * np.pi * params.sigma2_gamma)
        seq -= 0.5 * (gamma[0] - params.gamma_bar) ** 2 / params.sigma2_gamma
        for t in range(1, params.T):
            seq -= 0.5 * np.log(2 * np.pi * params.sigma2_delta)
            seq -= 0.5 * (gamma[t] - params.rho * gamma[t - 1]) ** 2 / params.sigma2_delta
        assert abs(dense - seq) < 1e-8

    def test_shape_validated(self):
        p = bm.BaseMeasureParams(0.0, 1.0, 1.0, 0.5, 4)
        with pytest.raises(ValidationError):
            bm.log_density(np.zeros(3), p)
        with pytest.raises(ValidationError):
            bm.log_density(np.array([0.0, np.inf, 0.0, 0.0]), p)


class TestSample:
    def test_zero_variance_returns_mean_path(self):
        p = bm.BaseMeasureParams(1.3, 0.0, 0.0, 0.6, 6)
        rng = np.random.default_rng(0)
        np.testing.assert_allclose(bm.sample(p, rng), bm.ar1_mean(p), rtol=1e-14)

    def test_deterministic_given_seed(self):
        p = bm.BaseMeasureParams(0.0, 1.0, 0.5, 0.8, 10)
        a = bm.sample(p, np.random.default_rng(42))
        b = bm.sample(p, np.random.default_rng(42))
        np.testing.assert_array_equal(a, b)

    def test_sample_many_matches_single_stream_shape(self):
        p = bm.BaseMeasureParams(0.0, 1.0, 0.5, 0.8, 7)
        draws = bm.sample_many(p, 100, np.random.default_rng(1))
        assert draws.shape == (100, 7)

    def test_monte_carlo_covariance(self):
        p = bm.BaseMeasureParams(0.0, 1.0, 0.5, 0.8, 5)
        n = 50_000
        draws = bm.sample_many(p, n, np.random.default_rng(7))
        emp = np.cov(draws, rowvar=False)
        cov = bm.ar1_covariance(p)
        # entrywise 3 Monte-Carlo standard errors (Gaussian fourth moments)
        se = np.sqrt(
            (np.outer(np.diag(cov), np.diag(cov)) + cov**2) / n
        )
        assert np.all(np.abs(emp - cov) < 3.5 * se)

    def test_monte_carlo_mean(self):
        p = bm.BaseMeasureParams(2.0, 0.5, 0.2, 0.9, 4)
        draws = bm.sample_many(p, 50_000, np.random.default_rng(3))
        se = np.sqrt(np.diag(bm.ar1_covariance(p)) / 50_000)
        assert np.all(np.abs(draws.mean(axis=0) - bm.ar1_mean(p)) < 4 * se)


class TestStickBreaking:
    def test_invariants(self):
        p = bm.BaseMeasureParams(0.0, 1.0, 0.5, 0.5, 4)
        real = bm.stick_breaking(1.5, 30, p, np.random.default_rng(0))
        assert real.weights.shape == (30,)
        assert real.atoms.shape == (30, 4)
        assert np.all(real.weights >= 0)
        assert real.weights.sum() <= 1.0
        assert real.deficit == pytest.approx(1.0 - real.weights.sum())

    def test_first_weight_mean(self):
        # E[p1] = 1/(1+tau) for b1 ~ Beta(1, tau)
        p = bm.BaseMeasureParams(0.0, 1.0, 1.0, 0.5, 2)
        tau = 3.0
        rng = np.random.default_rng(11)
        first = [bm.stick_breaking(tau, 2, p, rng).weights[0] for _ in range(20_000)]
        mean, se = np.mean(first), np.std(first) / np.sqrt(len(first))
        assert abs(mean - 1 / (1 + tau)) < 3 * se

    def test_deficit_mean(self):
        # deficit = prod(1 - b_k) has mean (tau/(1+tau))^K
        p = bm.BaseMeasureParams(0.0, 1.0, 1.0, 0.5, 2)
        tau, K, n = 2.0, 10, 10_000
        rng = np.random.default_rng(5)
        deficits = np.array([bm.stick_breaking(tau, K, p, rng).deficit for _ in range(n)])
        expected = (tau / (1 + tau)) ** K
        # var of prod is ((tau/(2+tau)))^K - expected^2
        var = (tau / (2 + tau)) ** K - expected**2
        assert abs(deficits.mean() - expected) < 3 * np.sqrt(var / n)

    def test_validation(self):
        p = bm.BaseMeasureParams(0.0, 1.0, 1.0, 0.5, 2)
        with pytest.raises(ValidationError):
            bm.stick_breaking(0.0, 5, p, np.random.default_rng(0))
        with pytest.raises(ValidationError):
            bm.stick_breaking(1.0, 0, p, np.random.default_rng(0))
