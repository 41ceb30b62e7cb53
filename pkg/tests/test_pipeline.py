import numpy as np
import pytest

from flowselect.errors import StageError
from flowselect.flow import FlowArchitecture, TrainConfig
from flowselect.hrt import PipelineConfig, prepare_pipeline, run_pipeline, split_rows
from flowselect.hrt import test_with_response as evaluate_response

TINY_FLOW = dict(
    flow_train=TrainConfig(epochs_phase1=4, epochs_phase2=4, batch_size=128),
    flow_arch=FlowArchitecture(n_clusters=3, n_maf_layers=2, hidden_sizes=(12,)),
)


def tiny_config(**kwargs) -> PipelineConfig:
    base = dict(
        seed=5,
        n_null_samples=20,
        burn_in=10,
        lasso_grid_size=10,
        gamma=0.2,
        **TINY_FLOW,
    )
    base.update(kwargs)
    return PipelineConfig(**base)


@pytest.fixture(scope="module")
def small_data():
    rng = np.random.default_rng(42)
    x = rng.normal(size=(1200, 3))
    y = 2.0 * x[:, 0] + 0.5 * rng.standard_normal(1200)
    return x, y


class TestSplit:
    def test_disjoint_and_covering(self):
        train, test = split_rows(100, 0.5, seed=1)
        assert len(set(train) & set(test)) == 0
        assert sorted(set(train) | set(test)) == list(range(100))

    def test_deterministic(self):
        a = split_rows(50, 0.6, seed=2)
        b = split_rows(50, 0.6, seed=2)
        np.testing.assert_array_equal(a[0], b[0])


class TestRunPipeline:
    def test_report_well_formed(self, small_data):
        x, y = small_data
        report = run_pipeline(x, y, tiny_config())
        k = report.n_null_samples
        grid = np.round(report.p_values * (k + 1)) / (k + 1)
        np.testing.assert_allclose(report.p_values, grid, atol=1e-12)
        assert report.p_values.min() >= 1 / (k + 1)
        assert report.p_values.max() <= 1.0
        assert len(report.feature_ids) == 3

    def test_deterministic_given_seed(self, small_data):
        x, y = small_data
        a = run_pipeline(x, y, tiny_config())
        b = run_pipeline(x, y, tiny_config())
        np.testing.assert_array_equal(a.p_values, b.p_values)
        assert a.observed_statistic == b.observed_statistic

    def test_thread_pool_matches_serial(self, small_data):
        x, y = small_data
        serial = run_pipeline(x, y, tiny_config(threads=1))
        threaded = run_pipeline(x, y, tiny_config(threads=2))
        np.testing.assert_array_equal(serial.p_values, threaded.p_values)

    def test_resume_from_null_caches(self, small_data, tmp_path):
        x, y = small_data
        cfg = tiny_config(null_cache_dir=tmp_path / "nulls")
        first = run_pipeline(x, y, cfg)
        assert sorted(p.name for p in (tmp_path / "nulls").iterdir()) == [
            f"nulls_feature_{j:05d}.fsns" for j in range(3)
        ]
        resumed = run_pipeline(x, y, cfg)
        np.testing.assert_array_equal(first.p_values, resumed.p_values)

    def test_oracle_conditional_bypasses_flow(self, small_data):
        from flowselect.mog import MoGSpec

        x, y = small_data
        # data is standard normal, so an exact single-component oracle target
        spec = MoGSpec(weights=(1.0,), component_means=(0.0,), off_diagonals=(0.0,), dim=3)
        cfg = tiny_config(oracle_conditional=spec)
        report = run_pipeline(x, y, cfg)
        state = prepare_pipeline(x, cfg)
        assert state.flow is None
        assert report.p_values.shape == (3,)

    def test_stage_failure_names_stage(self):
        x = np.full((100, 2), np.nan)
        with pytest.raises(StageError, match="flow"):
            run_pipeline(x, np.zeros(100), tiny_config())

    def test_feature_permutation_equivariance(self, small_data):
        # permuting feature columns permutes the per-feature results;
        # the oracle target makes the joint density permutation-symmetric
        from flowselect.mog import MoGSpec

        x, y = small_data
        spec = MoGSpec(weights=(1.0,), component_means=(0.0,), off_diagonals=(0.0,), dim=3)
        cfg = tiny_config(oracle_conditional=spec)
        base = run_pipeline(x, y, cfg)
        perm = np.array([2, 0, 1])
        permuted = run_pipeline(x[:, perm], y, cfg)
        np.testing.assert_array_equal(permuted.p_values, base.p_values[perm])


class TestSharedStateReplicates:
    def test_state_reuse_matches_fresh_runs(self, small_data):
        x, _ = small_data
        cfg = tiny_config()
        state = prepare_pipeline(x, cfg)
        rng = np.random.default_rng(0)
        for _ in range(2):
            y = x[:, 1] + 0.3 * rng.standard_normal(x.shape[0])
            reused = evaluate_response(state, y)
            fresh = run_pipeline(x, y, cfg)
            np.testing.assert_array_equal(reused.p_values, fresh.p_values)


@pytest.mark.slow
class TestGlobalBehaviorFixture:
    def test_strong_signal_selection_rates(self):
        # D=2, y = 5*x0 + 0.1 eps, N=5000, K=200: feature 1 always selected,
        # feature 2's p-value > 0.05 in >= 90% of 20 seeded response draws.
        # Observed on this configuration before freezing: 20/20 and 18/20.
        rng = np.random.default_rng(1)
        n = 5000
        x = rng.normal(size=(n, 2))
        cfg = PipelineConfig(
            seed=3,
            n_null_samples=200,
            burn_in=50,
            flow_train=TrainConfig(epochs_phase1=60, epochs_phase2=60, batch_size=256),
            flow_arch=FlowArchitecture(n_clusters=6, n_maf_layers=3, hidden_sizes=(32, 32)),
            lasso_grid_size=30,
            gamma=0.1,
        )
        state = prepare_pipeline(x, cfg)
        selected_1 = 0
        null_ok = 0
        runs = 20
        for s in range(runs):
            y = 5.0 * x[:, 0] + 0.1 * np.random.default_rng(100 + s).standard_normal(n)
            report = evaluate_response(state, y)
            selected_1 += bool(report.selected[0])
            null_ok += report.p_values[1] > 0.05
        assert selected_1 == runs
        assert null_ok >= 0.9 * runs
