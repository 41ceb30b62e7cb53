import numpy as np
import pytest

from flowselect.errors import InvalidInputError
from flowselect.flow import FlowArchitecture, Standardizer, build_flow
from flowselect.flow.gaussianize import LOG_2PI

from conftest import identity_flow, random_small_flow


class TestIdentityConfiguration:
    def test_forward_is_standardization(self, rng):
        model = identity_flow(2, n_maf_layers=2)
        model.standardizer = Standardizer(mean=np.array([1.0, -2.0]), std=np.array([2.0, 0.5]))
        x = rng.normal(size=(6, 2))
        z, log_det = model.forward(x)
        np.testing.assert_allclose(z, (x - model.standardizer.mean) / model.standardizer.std)
        np.testing.assert_allclose(log_det, -np.log(model.standardizer.std).sum(), atol=1e-9)

    def test_log_density_is_standard_normal(self):
        model = identity_flow(1)
        assert model.log_density(np.array([0.0])) == pytest.approx(
            -0.9189385332046727, abs=1e-12
        )
        x = np.array([[0.3], [-1.7]])
        expected = -0.5 * x[:, 0] ** 2 - 0.5 * LOG_2PI
        np.testing.assert_allclose(model.log_density(x), expected, atol=1e-12)


class TestInvertibility:
    @pytest.mark.parametrize("dim", [1, 3])
    def test_roundtrip_within_tolerance(self, dim, rng):
        model = random_small_flow(dim, seed=7)
        x = rng.normal(size=(12, dim))
        z, _ = model.forward(x)
        back = model.inverse(z)
        np.testing.assert_allclose(back, x, rtol=1e-6, atol=1e-6)

    def test_sample_then_forward_recovers_base_draws(self):
        model = random_small_flow(2, seed=3)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=11))
        z = rng.standard_normal((50, 2))
        x = model.inverse(z)
        z_back, _ = model.forward(x)
        np.testing.assert_allclose(z_back, z, atol=1e-5)

    def test_identity_flow_sampling_is_standard_normal(self):
        model = identity_flow(2)
        draws = model.sample(4000, seed=5)
        assert np.abs(draws.mean(axis=0)).max() < 4 / np.sqrt(4000)


class TestJacobianConsistency:
    @pytest.mark.parametrize("dim", [2, 4, 5])
    def test_log_det_matches_dense_numerical_jacobian(self, dim):
        model = random_small_flow(dim, seed=dim)
        rng = np.random.default_rng(100 + dim)
        x = rng.normal(size=(3, dim))
        _, log_det = model.forward(x)
        h = 1e-5
        for r in range(x.shape[0]):
            jac = np.zeros((dim, dim))
            for j in range(dim):
                up = x[r].copy()
                up[j] += h
                dn = x[r].copy()
                dn[j] -= h
                jac[:, j] = (model.forward(up)[0] - model.forward(dn)[0]) / (2 * h)
            sign, fd = np.linalg.slogdet(jac)
            assert sign > 0
            assert log_det[r] == pytest.approx(fd, rel=1e-4)


class TestLossAndGradients:
    def test_alpha_bias_gradient_of_log_det_term(self):
        # on a zero batch the base-density path vanishes, leaving exactly the
        # -sum(alpha) log-det contribution: d nll / d b_alpha = +1 per dim
        model = identity_flow(3)
        batch = np.zeros((4, 3))
        _, grads, _ = model.loss_and_gradients(batch)
        np.testing.assert_allclose(grads["maf0.b_alpha"], 1.0, atol=1e-12)
        np.testing.assert_allclose(grads["maf0.b_mu"], 0.0, atol=1e-12)

    def test_duplicating_rows_changes_nothing(self, rng):
        model = random_small_flow(3, seed=9)
        batch = rng.normal(size=(6, 3))
        doubled = np.vstack([batch, batch])
        nll1, grads1, _ = model.loss_and_gradients(batch)
        nll2, grads2, _ = model.loss_and_gradients(doubled)
        assert nll1 == pytest.approx(nll2, abs=1e-12)
        for k in grads1:
            np.testing.assert_allclose(grads1[k], grads2[k], atol=1e-12)

    def test_every_parameter_gradient_matches_finite_differences(self):
        model = random_small_flow(4, seed=21, n_maf_layers=2, hidden=(6,), n_clusters=2)
        rng = np.random.default_rng(77)
        batch = rng.normal(size=(8, 4))
        _, grads, _ = model.loss_and_gradients(batch)
        params = model.parameters()
        h = 1e-5
        for name, arr in params.items():
            for idx in np.ndindex(arr.shape):
                orig = arr[idx]
                arr[idx] = orig + h
                up = model.loss_and_gradients(batch)[0]
                arr[idx] = orig - h
                down = model.loss_and_gradients(batch)[0]
                arr[idx] = orig
                fd = (up - down) / (2 * h)
                err = abs(grads[name][idx] - fd)
                tol = max(1e-4 * abs(fd), 1e-6)
                assert err < tol, f"{name}[{idx}]: analytic {grads[name][idx]} vs fd {fd}"

    def test_rejects_bad_batches(self):
        model = identity_flow(2)
        with pytest.raises(InvalidInputError):
            model.loss_and_gradients(np.full((3, 2), np.nan))
        with pytest.raises(InvalidInputError):
            model.loss_and_gradients(np.zeros((3, 5)))


class TestQuadratureNormalization:
    def test_trained_1d_density_integrates_to_one(self):
        from flowselect.flow import TrainConfig, train_flow

        rng = np.random.default_rng(41)
        data = rng.standard_normal((2048, 1))
        cfg = TrainConfig(epochs_phase1=8, epochs_phase2=8, batch_size=256, seed=0)
        arch = FlowArchitecture(n_clusters=3, n_maf_layers=2, hidden_sizes=(16,))
        model = train_flow(data, cfg, arch).model
        grid = np.linspace(-10, 10, 2001)
        dens = np.exp(model.log_density(grid[:, None]))
        assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-2)

    def test_trained_2d_density_integrates_to_one(self):
        from flowselect.flow import TrainConfig, train_flow

        rng = np.random.default_rng(42)
        base = rng.standard_normal((2048, 2))
        data = base @ np.array([[1.0, 0.0], [0.6, 0.8]])  # correlated pair
        cfg = TrainConfig(epochs_phase1=8, epochs_phase2=8, batch_size=256, seed=0)
        arch = FlowArchitecture(n_clusters=3, n_maf_layers=2, hidden_sizes=(16,))
        model = train_flow(data, cfg, arch).model
        g = np.linspace(-8, 8, 161)
        xx, yy = np.meshgrid(g, g)
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        dens = np.exp(model.log_density(pts)).reshape(xx.shape)
        total = np.trapezoid(np.trapezoid(dens, g, axis=1), g)
        assert total == pytest.approx(1.0, abs=5e-2)
