import numpy as np
import pytest

from flowselect.flow import (
    FlowArchitecture,
    FlowModel,
    GaussLayerParams,
    Standardizer,
    build_flow,
    init_batchnorm_params,
    init_made_params,
)


def identity_flow(dim: int, n_maf_layers: int = 1, bn_eps: float = 1e-12) -> FlowModel:
    """Flow whose every stage is the identity: unit standardizer, bypassed
    Gaussianization, zero MADE heads, unit batch norm."""
    rng = np.random.default_rng(0)
    layers = []
    for i in range(n_maf_layers):
        made = init_made_params(dim, (8,), rng)
        for w in made.hidden_weights:
            w[...] = 0.0
        layers.append(made)
        if i < n_maf_layers - 1:
            layers.append(init_batchnorm_params(dim, eps=bn_eps))
    return FlowModel(
        standardizer=Standardizer.identity(dim),
        gauss=GaussLayerParams(mu=np.zeros((dim, 1)), log_s=np.zeros((dim, 1))),
        maf_layers=layers,
        dim=dim,
        gauss_bypass=True,
    )


def random_small_flow(
    dim: int,
    seed: int,
    n_maf_layers: int = 2,
    hidden: tuple = (8, 8),
    n_clusters: int = 2,
    perturb: float = 0.1,
) -> FlowModel:
    """Small randomized flow with every parameter tensor nudged off its
    init so gradient and Jacobian probes exercise all code paths."""
    rng = np.random.default_rng(seed)
    init = rng.standard_normal((64, dim))
    arch = FlowArchitecture(
        n_clusters=n_clusters, n_maf_layers=n_maf_layers, hidden_sizes=hidden
    )
    model = build_flow(dim, arch, init_data=init, seed=seed)
    for name, p in model.parameters().items():
        p += perturb * rng.standard_normal(p.shape)
    for layer in model.maf_layers:
        if hasattr(layer, "running_var"):
            layer.running_mean[...] = 0.2 * rng.standard_normal(dim)
            layer.running_var[...] = np.exp(0.2 * rng.standard_normal(dim))
    return model


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
