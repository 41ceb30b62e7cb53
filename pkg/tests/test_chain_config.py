import numpy as np
import pytest

from flowselect.errors import ConfigError, NumericError
from flowselect.flow import build_masks
from flowselect.sampler import ChainConfig, NullSamples


class TestChainConfig:
    def test_step_accounting(self):
        cfg = ChainConfig(n_samples=10, burn_in=5, thinning=3)
        assert cfg.n_steps == 5 + 30

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n_samples=0),
            dict(burn_in=-1),
            dict(thinning=0),
            dict(proposal_scale_multiplier=0.0),
            dict(init="midpoint"),
        ],
    )
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(ConfigError):
            ChainConfig(**kwargs)


class TestNullSamplesValidation:
    def test_non_finite_samples_rejected(self):
        with pytest.raises(NumericError):
            NullSamples(feature_index=0, samples=np.array([[np.inf]]), acceptance_rate=None)

    def test_out_of_range_acceptance_rejected(self):
        with pytest.raises(NumericError):
            NullSamples(
                feature_index=0,
                samples=np.zeros((2, 2)),
                acceptance_rate=np.array([0.5, 1.2]),
            )


def test_made_masks_degenerate_single_dimension():
    # D=1: the only output depends on nothing, so the head is bias-only
    masks = build_masks(1, (4,))
    assert masks[-1].sum() == 0
    assert masks[0].shape == (1, 4)
