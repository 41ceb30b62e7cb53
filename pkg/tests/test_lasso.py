import numpy as np
import pytest

from flowselect.models import fit_lasso_at, fit_lasso_cv, lambda_max
from flowselect.models.lasso import soft_threshold


def make_orthonormal_design(rng, n=64, d=4):
    # orthonormal AND mean-zero columns (orthogonal to the ones vector), so
    # the fit's internal centering leaves the design unchanged
    q, _ = np.linalg.qr(np.column_stack([np.ones(n), rng.normal(size=(n, d))]))
    return q[:, 1:]


def objective(x, y, beta, intercept, lam):
    n = x.shape[0]
    resid = y - x @ beta - intercept
    return (resid @ resid) / n + lam * np.abs(beta).sum()


class TestClosedForms:
    def test_full_shrinkage_at_lambda_max(self, rng):
        x = rng.normal(size=(50, 3))
        y = rng.normal(size=50) + x[:, 0]
        xc, yc = x - x.mean(axis=0), y - y.mean()
        lam_top = lambda_max(xc, yc)
        model = fit_lasso_at(x, y, lam_top * 1.0001)
        np.testing.assert_allclose(model.beta, 0.0, atol=1e-12)
        assert model.intercept == pytest.approx(y.mean())

    def test_orthonormal_design_soft_thresholding(self, rng):
        # with orthonormal columns the solution is coordinatewise
        # soft-thresholding of OLS at lambda*N/2 (per the (1/N) objective)
        x = make_orthonormal_design(rng)
        n = x.shape[0]
        beta_true = np.array([2.0, -1.0, 0.3, 0.0])
        y = x @ beta_true + 0.05 * rng.normal(size=n)
        yc = y - y.mean()
        beta_ols = x.T @ yc
        for lam in [0.001, 0.01, 0.05]:
            model = fit_lasso_at(x, y, lam)
            expected = np.array([soft_threshold(b, lam * n / 2) for b in beta_ols])
            np.testing.assert_allclose(model.beta, expected, atol=1e-6)

    def test_local_optimality_against_perturbations(self, rng):
        # correlated design: returned beta must beat 1000 random nudges
        x = rng.normal(size=(80, 2))
        x[:, 1] = 0.8 * x[:, 0] + 0.6 * x[:, 1]
        y = x @ np.array([1.0, -0.5]) + 0.1 * rng.normal(size=80)
        lam = 0.05
        model = fit_lasso_at(x, y, lam)
        base = objective(x, y, model.beta, model.intercept, lam)
        for _ in range(1000):
            nudge = model.beta + 1e-3 * rng.normal(size=2)
            assert objective(x, y, nudge, model.intercept, lam) >= base - 1e-12


class TestKktConditions:
    def test_stationarity_at_solution(self, rng):
        x = rng.normal(size=(120, 6))
        beta_true = np.array([1.5, 0.0, -2.0, 0.0, 0.0, 0.7])
        y = x @ beta_true + 0.3 * rng.normal(size=120)
        lam = 0.1
        model = fit_lasso_at(x, y, lam)
        n = x.shape[0]
        resid = y - x @ model.beta - model.intercept
        grad = (2.0 / n) * (x.T @ resid)
        for j in range(6):
            if model.beta[j] == 0.0:
                assert abs(grad[j]) <= lam + 1e-5
            else:
                assert grad[j] == pytest.approx(lam * np.sign(model.beta[j]), abs=1e-5)


class TestCrossValidation:
    def test_selected_lambda_minimizes_curve_and_sits_on_grid(self, rng):
        x = rng.normal(size=(100, 5))
        y = x @ np.array([2.0, 0.0, 0.0, -1.0, 0.0]) + 0.2 * rng.normal(size=100)
        grid = np.geomspace(1.0, 1e-4, 25)
        model = fit_lasso_cv(x, y, lambda_grid=grid, folds=5, seed=0)
        lams = np.array([l for l, _ in model.cv_curve])
        mses = np.array([m for _, m in model.cv_curve])
        assert model.lambda_selected in lams
        assert mses[lams == model.lambda_selected][0] == mses.min()
        assert np.isclose(grid, model.lambda_selected).any()

    def test_recovers_sparse_signal(self, rng):
        x = rng.normal(size=(300, 8))
        beta_true = np.zeros(8)
        beta_true[[1, 5]] = [1.5, -2.0]
        y = x @ beta_true + 0.1 * rng.normal(size=300)
        model = fit_lasso_cv(x, y, folds=5, seed=1, grid_size=40)
        support = np.flatnonzero(np.abs(model.beta) > 0.05)
        np.testing.assert_array_equal(support, [1, 5])

    def test_deterministic(self, rng):
        x = rng.normal(size=(60, 3))
        y = rng.normal(size=60)
        a = fit_lasso_cv(x, y, folds=3, seed=9, grid_size=10)
        b = fit_lasso_cv(x, y, folds=3, seed=9, grid_size=10)
        np.testing.assert_array_equal(a.beta, b.beta)
        assert a.lambda_selected == b.lambda_selected


class TestKernelEquivalence:
    def test_numba_and_python_kernels_agree_exactly(self, rng):
        from flowselect.models.lasso import _cd_kernel, _cd_kernel_py

        x = rng.normal(size=(200, 6))
        x[:, 1] = 0.95 * x[:, 0] + 0.05 * x[:, 1]  # ill-conditioned pair
        y = x @ rng.normal(size=6) + rng.normal(size=200)
        xc, yc = x - x.mean(axis=0), y - y.mean()
        gram = (2 / 200) * (xc.T @ xc)
        xty = (2 / 200) * (xc.T @ yc)
        for lam in [0.5, 0.05, 0.001]:
            b_fast, b_ref = np.zeros(6), np.zeros(6)
            ok_fast = _cd_kernel(np.ascontiguousarray(gram), xty, lam, b_fast, 1e-7, 10000)
            ok_ref = _cd_kernel_py(gram, xty, lam, b_ref, 1e-7, 10000)
            assert bool(ok_fast) == bool(ok_ref)
            np.testing.assert_array_equal(b_fast, b_ref)


class TestPredict:
    def test_zero_beta_predicts_intercept(self):
        from flowselect.models import LassoModel

        model = LassoModel(beta=np.zeros(3), intercept=1.7, lambda_selected=1.0)
        out = model.predict(np.random.default_rng(0).normal(size=(5, 3)))
        np.testing.assert_allclose(out, 1.7)

    def test_column_swap_fast_path_matches_naive(self, rng):
        from flowselect.models import LassoModel

        model = LassoModel(beta=rng.normal(size=4), intercept=0.3, lambda_selected=0.1)
        x = rng.normal(size=(10, 4))
        cols = rng.normal(size=(10, 6))
        fast = model.predict_column_swaps(x, 2, cols)
        for k in range(6):
            swapped = x.copy()
            swapped[:, 2] = cols[:, k]
            np.testing.assert_allclose(fast[:, k], model.predict(swapped), atol=1e-12)
