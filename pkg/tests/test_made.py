import numpy as np
import pytest

from flowselect.errors import ConfigError
from flowselect.flow import MadeLayerParams, build_masks, init_made_params, made_forward
from flowselect.flow.made import made_backward, made_inverse


def zero_made(dim, hidden=(6,)):
    rng = np.random.default_rng(0)
    params = init_made_params(dim, hidden, rng)
    for w in params.hidden_weights:
        w[...] = 0.0
    return params


class TestMasks:
    def test_shapes_chain(self):
        masks = build_masks(4, (7, 5))
        assert [m.shape for m in masks] == [(4, 7), (7, 5), (5, 4)]

    def test_first_output_receives_nothing(self):
        masks = build_masks(3, (8,))
        # output column 0 (degree 1) must have no incoming connections
        assert masks[-1][:, 0].sum() == 0


class TestForward:
    def test_identity_at_zero_parameters(self, rng):
        params = zero_made(3)
        x = rng.normal(size=(5, 3))
        u, log_det = made_forward(x, params)
        np.testing.assert_allclose(u, x)
        np.testing.assert_allclose(log_det, 0.0)

    def test_autoregressive_perturbation(self, rng):
        # perturbing x_j must leave u_i unchanged for all i <= j except i == j
        d = 5
        params = init_made_params(d, (16, 16), rng)
        for p in [params.w_mu, params.w_alpha]:
            p += 0.5 * rng.standard_normal(p.shape)
        for _ in range(10):
            x = rng.normal(size=(1, d))
            u0, _ = made_forward(x, params)
            for j in range(d):
                bumped = x.copy()
                bumped[0, j] += 0.37
                u1, _ = made_forward(bumped, params)
                changed = np.flatnonzero(np.abs(u1 - u0)[0] > 1e-12)
                assert (changed >= j).all(), f"perturbing x_{j} changed u at {changed}"

    def test_numerical_jacobian_agreement(self, rng):
        # u and log_det must match a dense central finite-difference Jacobian
        d = 3
        params = init_made_params(d, (8,), rng)
        for p in [params.w_mu, params.w_alpha]:
            p += 0.3 * rng.standard_normal(p.shape)
        x = np.array([[0.1, -0.2, 0.3]])
        u, log_det = made_forward(x, params)
        h = 1e-5
        jac = np.zeros((d, d))
        for j in range(d):
            up = x.copy()
            up[0, j] += h
            dn = x.copy()
            dn[0, j] -= h
            jac[:, j] = (made_forward(up, params)[0] - made_forward(dn, params)[0])[0] / (2 * h)
        sign, fd_logdet = np.linalg.slogdet(jac)
        assert sign > 0
        assert log_det[0] == pytest.approx(fd_logdet, rel=1e-6, abs=1e-8)

    def test_shape_mismatch_raises(self):
        params = zero_made(3)
        with pytest.raises(ConfigError):
            made_forward(np.zeros((2, 4)), params)


class TestBackward:
    def test_matches_finite_differences(self, rng):
        d = 4
        params = init_made_params(d, (6, 5), rng)
        # nudge every tensor (biases included) so no ReLU sits exactly at
        # its kink, where finite differences are one-sided
        all_tensors = (
            params.hidden_weights
            + params.hidden_biases
            + [params.w_mu, params.b_mu, params.w_alpha, params.b_alpha]
        )
        for p in all_tensors:
            p += 0.2 * rng.standard_normal(p.shape)
        x = rng.normal(size=(3, d))
        w_u = rng.normal(size=(3, d))
        w_ld = rng.normal(size=3)

        def loss():
            u, ld = made_forward(x, params)
            return float((w_u * u).sum() + (w_ld * ld).sum())

        _, _, cache = made_forward(x, params, want_cache=True)
        g_x, grads = made_backward(params, cache, w_u, w_ld)

        tensors = {f"w{i}": w for i, w in enumerate(params.hidden_weights)}
        tensors |= {f"b{i}": b for i, b in enumerate(params.hidden_biases)}
        tensors |= {
            "w_mu": params.w_mu,
            "b_mu": params.b_mu,
            "w_alpha": params.w_alpha,
            "b_alpha": params.b_alpha,
        }
        h = 1e-6
        for name, arr in tensors.items():
            for idx in np.ndindex(arr.shape):
                orig = arr[idx]
                arr[idx] = orig + h
                up = loss()
                arr[idx] = orig - h
                down = loss()
                arr[idx] = orig
                fd = (up - down) / (2 * h)
                assert grads[name][idx] == pytest.approx(fd, rel=1e-4, abs=1e-7), name
        for idx in np.ndindex(x.shape):
            orig = x[idx]
            x[idx] = orig + h
            up = loss()
            x[idx] = orig - h
            down = loss()
            x[idx] = orig
            assert g_x[idx] == pytest.approx((up - down) / (2 * h), rel=1e-4, abs=1e-7)


class TestInverse:
    def test_roundtrip(self, rng):
        d = 4
        params = init_made_params(d, (8,), rng)
        for p in [params.w_mu, params.w_alpha]:
            p += 0.3 * rng.standard_normal(p.shape)
        x = rng.normal(size=(6, d))
        u, _ = made_forward(x, params)
        np.testing.assert_allclose(made_inverse(u, params), x, atol=1e-9)
