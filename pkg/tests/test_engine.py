import numpy as np
import pytest

from hypothesis import given, settings
from hypothesis import strategies as st

from ccga.engine import RunConfig, ThresholdSpec, ordering_threshold_set, run_trial
from ccga.model import RandomStream


def full_first_counts(D, K, m):
    """Initial counts with all mass on the first category."""
    row = [m * K] + [0] * (K - 1)
    return tuple(tuple(row) for _ in range(D))


class TestHitDetection:
    def test_converged_state_hits_immediately(self):
        cfg = RunConfig(D=3, K=2, m=4, initial_counts=full_first_counts(3, 2, 4),
                        max_iterations=10)
        result = run_trial(cfg)
        assert result.hit and result.t_hit == 0
        assert result.iterations_executed == 1

    def test_hit_recorded_at_sampling_time(self):
        # a single dimension at theta = 1/2 hits as soon as either of the two
        # samples picks the first category, before any update is applied
        cfg = RunConfig(D=1, K=2, m=1, seed=3, max_iterations=100)
        result = run_trial(cfg)
        assert result.hit
        counts = result.final_params.counts
        # stop happened before the winning update
        assert result.iterations_executed == result.t_hit + 1
        assert counts.sum() == 2

    def test_censoring_without_hit(self):
        counts = tuple(
            tuple([0, 3, 0]) for _ in range(2)
        )  # optimum has probability zero
        cfg = RunConfig(D=2, K=3, m=1, seed=5, initial_counts=counts,
                        max_iterations=50)
        # the all-second state is a fixed point that never samples the optimum
        result = run_trial(cfg)
        assert not result.hit and result.t_hit is None
        assert result.iterations_executed == 50

    def test_continue_past_first_hit(self):
        cfg = RunConfig(D=2, K=2, m=2, seed=11, max_iterations=400,
                        stop_at_first_hit=False)
        result = run_trial(cfg)
        assert result.hit
        assert result.iterations_executed == 400
        assert result.t_hit < 400


class TestEngineEquivalence:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31), st.integers(1, 6), st.integers(2, 5),
           st.integers(1, 8), st.sampled_from(["com", "kval"]))
    def test_fast_and_reference_trajectories_match(self, seed, D, K, m, objective):
        cfg = RunConfig(D=D, K=K, m=m, objective_kind=objective, seed=seed,
                        max_iterations=300, thresholds=ordering_threshold_set(0.5))
        fast = run_trial(cfg, stream=RandomStream(seed), engine="fast")
        ref = run_trial(cfg, stream=RandomStream(seed), engine="reference")
        assert fast.hit == ref.hit and fast.t_hit == ref.t_hit
        assert fast.iterations_executed == ref.iterations_executed
        assert fast.threshold_crossings == ref.threshold_crossings
        assert fast.first_low_optimal == ref.first_low_optimal
        assert fast.first_ratio_violation == ref.first_ratio_violation
        assert fast.optimal_sum_monotone == ref.optimal_sum_monotone
        assert np.array_equal(fast.final_params.counts, ref.final_params.counts)

    def test_no_stop_equivalence(self):
        cfg = RunConfig(D=3, K=3, m=3, objective_kind="kval", seed=17,
                        max_iterations=500, stop_at_first_hit=False)
        fast = run_trial(cfg, stream=RandomStream(17), engine="fast")
        ref = run_trial(cfg, stream=RandomStream(17), engine="reference")
        assert np.array_equal(fast.final_params.counts, ref.final_params.counts)
        assert fast.t_hit == ref.t_hit


class TestThresholds:
    def test_initial_state_crossings_are_at_zero(self):
        cfg = RunConfig(D=2, K=2, m=2, max_iterations=5,
                        initial_counts=full_first_counts(2, 2, 2),
                        thresholds=ordering_threshold_set(0.5))
        result = run_trial(cfg)
        assert all(t == 0 for t in result.threshold_crossings.values())

    def test_uncrossed_thresholds_are_none(self):
        counts = tuple(tuple([0, 3, 0]) for _ in range(2))
        cfg = RunConfig(D=2, K=3, m=1, seed=1, initial_counts=counts,
                        max_iterations=10, thresholds=ordering_threshold_set(0.5))
        result = run_trial(cfg)
        assert all(t is None for t in result.threshold_crossings.values())

    def test_sum_threshold_is_exact_at_tie(self):
        # D=2, alpha=1/2: sum threshold is theta_1 + theta_2 >= 1.5, reached
        # exactly by counts (4, 2) on a grid of 4
        counts = ((4, 0), (2, 2))
        spec = (ThresholdSpec("sum", "sum-offset", 0.5),)
        cfg = RunConfig(D=2, K=2, m=2, initial_counts=counts, max_iterations=3,
                        thresholds=spec)
        result = run_trial(cfg)
        assert result.threshold_crossings["sum"] == 0

    def test_product_threshold_counts_exact_tie_as_crossed(self):
        # product = 1 * 1/2 = alpha exactly
        counts = ((4, 0), (2, 2))
        spec = (ThresholdSpec("prod", "product", 0.5),)
        cfg = RunConfig(D=2, K=2, m=2, initial_counts=counts, max_iterations=3,
                        thresholds=spec)
        result = run_trial(cfg)
        assert result.threshold_crossings["prod"] == 0

    def test_zero_alpha_product_crossed_at_start(self):
        cfg = RunConfig(D=2, K=2, m=2, max_iterations=3,
                        thresholds=(ThresholdSpec("p0", "product", 0.0),))
        assert run_trial(cfg).threshold_crossings["p0"] == 0

    def test_final_state_crossing_is_recorded(self):
        # a crossing produced by the very last update is still observed
        cfg = RunConfig(D=1, K=2, m=1, seed=3, max_iterations=200,
                        stop_at_first_hit=False,
                        thresholds=(ThresholdSpec("p", "product", 1.0),))
        result = run_trial(cfg)
        if result.final_params.counts[0, 0] == 2:
            assert result.threshold_crossings["p"] is not None

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            ThresholdSpec("x", "mean", 0.5)


class TestTraces:
    def test_reference_traces_recorded_with_stride(self):
        cfg = RunConfig(D=2, K=2, m=3, seed=9, max_iterations=50,
                        stop_at_first_hit=False, record_trace_every=10)
        result = run_trial(cfg, engine="reference")
        assert result.traces is not None
        assert list(result.traces["t"]) == [0, 10, 20, 30, 40]
        assert result.traces["onemax_potential"].shape == (5, 2)
        assert result.traces["optimal_sum"][0] == pytest.approx(1.0)

    def test_kval_traces_have_scalar_potentials(self):
        cfg = RunConfig(D=2, K=3, m=2, objective_kind="kval", seed=4,
                        max_iterations=20, stop_at_first_hit=False,
                        record_trace_every=5)
        result = run_trial(cfg, engine="reference")
        assert result.traces["kval_potential"].shape == (4,)
        assert result.traces["kval_legacy"].shape == (4,)

    def test_fast_engine_refuses_traces(self):
        cfg = RunConfig(D=2, K=2, m=2, record_trace_every=1, max_iterations=5)
        with pytest.raises(ValueError):
            run_trial(cfg, engine="fast")


class TestConfigValidation:
    def test_rejects_bad_objective(self):
        with pytest.raises(ValueError):
            RunConfig(D=2, K=2, m=2, objective_kind="twomax")

    def test_custom_requires_weights(self):
        with pytest.raises(ValueError):
            RunConfig(D=2, K=2, m=2, objective_kind="custom")

    def test_rejects_zero_iterations(self):
        with pytest.raises(ValueError):
            RunConfig(D=2, K=2, m=2, max_iterations=0)

    def test_unknown_engine_rejected(self):
        with pytest.raises(ValueError):
            run_trial(RunConfig(D=2, K=2, m=2), engine="gpu")

    def test_custom_objective_runs_on_reference_path(self):
        cfg = RunConfig(D=2, K=2, m=2, objective_kind="custom",
                        custom_weights=((1, 0), (1, 0)), seed=2,
                        max_iterations=200)
        result = run_trial(cfg)  # auto dispatch
        assert result.iterations_executed >= 1


class TestDeterminism:
    def test_same_seed_same_result(self):
        cfg = RunConfig(D=4, K=3, m=5, objective_kind="com", seed=99,
                        max_iterations=1000)
        a = run_trial(cfg)
        b = run_trial(cfg)
        assert a.t_hit == b.t_hit
        assert np.array_equal(a.final_params.counts, b.final_params.counts)
