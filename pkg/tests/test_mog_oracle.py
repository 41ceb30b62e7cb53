import numpy as np
import pytest
from scipy import integrate, stats

from flowselect.errors import ConfigError
from flowselect.mog import MoGSpec, exact_mog_conditional, gen_mog_features

PAPER_MIXTURE = dict(
    weights=(0.371, 0.258, 0.371),
    component_means=(0.0, 20.0, 40.0),
    off_diagonals=(0.982, 0.976, 0.970),
)


class TestSpecValidation:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            MoGSpec(weights=(0.5, 0.4), component_means=(0, 1), off_diagonals=(0, 0), dim=2)

    def test_correlation_must_keep_covariance_pd(self):
        with pytest.raises(ConfigError):
            MoGSpec(weights=(1.0,), component_means=(0,), off_diagonals=(-0.9,), dim=3)


class TestGenerator:
    def test_single_standard_component_moments(self):
        spec = MoGSpec(weights=(1.0,), component_means=(0.0,), off_diagonals=(0.0,), dim=3)
        x = gen_mog_features(spec, 20000, seed=1)
        assert np.abs(x.mean(axis=0)).max() < 4 / np.sqrt(20000)
        np.testing.assert_allclose(np.cov(x, rowvar=False), np.eye(3), atol=0.05)

    def test_component_occupancy_matches_weights(self):
        spec = MoGSpec(dim=10, **PAPER_MIXTURE)
        x = gen_mog_features(spec, 50000, seed=2)
        # means are 20 apart with unit variances, so nearest-mean assignment
        # recovers the generating component essentially surely
        centers = np.array(PAPER_MIXTURE["component_means"])
        labels = np.argmin(np.abs(x.mean(axis=1)[:, None] - centers[None]), axis=1)
        occupancy = np.array([(labels == k).mean() for k in range(3)])
        np.testing.assert_allclose(occupancy, PAPER_MIXTURE["weights"], atol=0.01)

    def test_within_component_correlation(self):
        spec = MoGSpec(dim=10, **PAPER_MIXTURE)
        x = gen_mog_features(spec, 50000, seed=3)
        centers = np.array(PAPER_MIXTURE["component_means"])
        labels = np.argmin(np.abs(x.mean(axis=1)[:, None] - centers[None]), axis=1)
        comp0 = x[labels == 0]
        corr = np.corrcoef(comp0, rowvar=False)
        off = corr[~np.eye(10, dtype=bool)]
        assert abs(off.mean() - 0.982) < 0.01

    def test_deterministic_given_seed(self):
        spec = MoGSpec(dim=4, **PAPER_MIXTURE)
        np.testing.assert_array_equal(
            gen_mog_features(spec, 100, seed=7), gen_mog_features(spec, 100, seed=7)
        )


class TestJointDensity:
    def test_matches_scipy_on_single_component(self):
        spec = MoGSpec(weights=(1.0,), component_means=(2.0,), off_diagonals=(0.5,), dim=3)
        x = gen_mog_features(spec, 50, seed=4)
        expected = stats.multivariate_normal(spec.mean_vector(0), spec.covariance(0)).logpdf(x)
        np.testing.assert_allclose(spec.log_density(x), expected, atol=1e-10)

    def test_mixture_logsumexp_against_direct(self):
        spec = MoGSpec(dim=2, **PAPER_MIXTURE)
        x = gen_mog_features(spec, 30, seed=5)
        direct = np.zeros(30)
        for k in range(3):
            direct += spec.weights[k] * stats.multivariate_normal(
                spec.mean_vector(k), spec.covariance(k)
            ).pdf(x)
        np.testing.assert_allclose(spec.log_density(x), np.log(direct), atol=1e-10)


class TestExactConditional:
    def test_identity_covariance_is_marginal(self):
        spec = MoGSpec(weights=(1.0,), component_means=(3.0,), off_diagonals=(0.0,), dim=4)
        for x_rest in [np.zeros(3), np.array([5.0, -2.0, 0.4])]:
            cond = exact_mog_conditional(spec, x_rest, 1)
            assert cond.mean() == pytest.approx(3.0)
            assert cond.stds[0] == pytest.approx(1.0)

    def test_symmetric_components_keep_equal_weights(self):
        spec = MoGSpec(weights=(0.5, 0.5), component_means=(-2.0, 2.0), off_diagonals=(0.0, 0.0), dim=3)
        cond = exact_mog_conditional(spec, np.array([0.0, 0.0]), 0)
        np.testing.assert_allclose(cond.component_weights, [0.5, 0.5], atol=1e-12)

    def test_paper_parameters_normalize_and_match_rejection_sampling(self):
        spec = MoGSpec(dim=5, **PAPER_MIXTURE)
        x = gen_mog_features(spec, 3, seed=6)
        j = 2
        cond = exact_mog_conditional(spec, np.delete(x[0], j), j)

        total, _ = integrate.quad(lambda t: float(cond.pdf(np.array([t]))[0]), -20, 60, limit=200)
        assert total == pytest.approx(1.0, abs=1e-8)

        # rejection-style oracle: draw joint rows, keep those whose x_{-j}
        # lands in a small ball around the conditioning point, compare CDFs
        rng = np.random.default_rng(17)
        joint = gen_mog_features(spec, 400000, seed=8)
        rest = np.delete(joint, j, axis=1)
        target = np.delete(x[0], j)
        dist = np.abs(rest - target).max(axis=1)
        keep = joint[dist < 0.12, j]
        assert keep.size > 300, "conditioning ball too small for the oracle"
        sorted_k = np.sort(keep)
        ks = np.abs(cond.cdf(sorted_k) - np.arange(1, keep.size + 1) / keep.size).max()
        assert ks < 0.1

    def test_conditional_mean_interpolates(self):
        # strong positive correlation pulls the conditional mean toward
        # the conditioning values
        spec = MoGSpec(weights=(1.0,), component_means=(0.0,), off_diagonals=(0.9,), dim=3)
        cond_hi = exact_mog_conditional(spec, np.array([2.0, 2.0]), 0)
        cond_lo = exact_mog_conditional(spec, np.array([-2.0, -2.0]), 0)
        assert cond_hi.mean() > 1.5
        assert cond_lo.mean() < -1.5
