import numpy as np
import pytest

from flowselect.errors import InvalidInputError
from flowselect.flow import (
    FlowArchitecture,
    TrainConfig,
    TrainConfig as TC,
    save_checkpoint,
    train_flow,
    write_metrics_csv,
)

SMALL_ARCH = FlowArchitecture(n_clusters=4, n_maf_layers=2, hidden_sizes=(24,))


def test_standard_normal_nll_close_to_entropy():
    # the expected NLL of the true model is the differential entropy of
    # N(0,1): 0.5*log(2*pi*e) = 1.41894 nats per dimension
    rng = np.random.default_rng(2024)
    data = rng.standard_normal((20000, 2))
    cfg = TrainConfig(epochs_phase1=6, epochs_phase2=10, batch_size=512, seed=1)
    result = train_flow(data, cfg, SMALL_ARCH)
    per_dim = result.best_val_nll / 2
    assert per_dim == pytest.approx(1.4189385, abs=0.05)


def test_identical_seeds_give_bitwise_identical_checkpoints(tmp_path):
    rng = np.random.default_rng(5)
    data = rng.standard_normal((1200, 2))
    cfg = TrainConfig(epochs_phase1=3, epochs_phase2=3, batch_size=128, seed=99)
    p1, p2 = tmp_path / "a.fsfl", tmp_path / "b.fsfl"
    save_checkpoint(train_flow(data, cfg, SMALL_ARCH).model, p1)
    save_checkpoint(train_flow(data, cfg, SMALL_ARCH).model, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_history_records_both_phases(tmp_path):
    rng = np.random.default_rng(6)
    data = rng.standard_normal((800, 1))
    cfg = TrainConfig(epochs_phase1=2, epochs_phase2=3, batch_size=64, seed=0)
    result = train_flow(data, cfg, SMALL_ARCH)
    phases = [rec.phase for rec in result.history]
    assert phases == [1, 1, 2, 2, 2]
    assert all(np.isfinite(rec.train_nll) and np.isfinite(rec.val_nll) for rec in result.history)
    # best epoch must point at the smallest phase-2 validation NLL
    phase2 = [rec for rec in result.history if rec.phase == 2]
    best = min(phase2, key=lambda rec: rec.val_nll)
    assert result.best_epoch == best.epoch
    assert result.best_val_nll == best.val_nll

    out = tmp_path / "metrics.csv"
    write_metrics_csv(result.history, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "epoch,phase,train_nll,val_nll"
    assert len(lines) == 6


def test_divergence_aborts_with_location():
    rng = np.random.default_rng(7)
    data = rng.standard_normal((600, 1))
    # absurd learning rate reliably blows the flow up within a few steps
    cfg = TrainConfig(
        epochs_phase1=1, epochs_phase2=50, learning_rate=5e4, batch_size=64, seed=3
    )
    from flowselect.errors import NumericError

    with pytest.raises(NumericError, match=r"epoch \d+, batch \d+"):
        train_flow(data, cfg, SMALL_ARCH)


def test_too_little_data_rejected():
    with pytest.raises(InvalidInputError):
        train_flow(np.zeros((10, 2)), TC(batch_size=64), SMALL_ARCH)


def test_config_validation():
    with pytest.raises(InvalidInputError):
        TC(epochs_phase1=0)
    with pytest.raises(InvalidInputError):
        TC(learning_rate=0.0)
    with pytest.raises(InvalidInputError):
        TC(validation_fraction=1.5)
