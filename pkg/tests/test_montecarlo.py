"""Experiment harness: determinism, accounting, aggregation, comparison."""

import json

import numpy as np
import pytest

from apla_lab import ExperimentConfig, UsageError, compare_prediction, run_experiment
from apla_lab.montecarlo import replicate_rng, run_replicate, write_series_csv

from conftest import AA, BB, make_params


@pytest.fixture
def small_config(staghunt, staghunt_apla) -> ExperimentConfig:
    return ExperimentConfig(
        game=staghunt, params=staghunt_apla, horizon=5000, runs=4, seed=314
    )


class TestConfig:
    def test_defaults_track_all_profiles(self, small_config):
        assert small_config.tracked_profiles == (0, 1, 2, 3)

    def test_validation(self, staghunt, staghunt_apla):
        with pytest.raises(UsageError):
            ExperimentConfig(staghunt, staghunt_apla, horizon=0, runs=1, seed=1)
        with pytest.raises(UsageError):
            ExperimentConfig(staghunt, staghunt_apla, horizon=10, runs=0, seed=1)
        with pytest.raises(UsageError):
            ExperimentConfig(
                staghunt, staghunt_apla, horizon=10, runs=1, seed=1,
                end_window_fraction=0.0,
            )
        with pytest.raises(UsageError):
            ExperimentConfig(
                staghunt, staghunt_apla, horizon=10, runs=1, seed=1,
                tracked_profiles=(9,),
            )
        with pytest.raises(UsageError):
            ExperimentConfig(
                staghunt, staghunt_apla, horizon=10, runs=1, seed=1,
                initial={"type": "vertex"},
            )

    def test_digest_changes_with_seed(self, staghunt, staghunt_apla):
        a = ExperimentConfig(staghunt, staghunt_apla, horizon=10, runs=1, seed=1)
        b = ExperimentConfig(staghunt, staghunt_apla, horizon=10, runs=1, seed=2)
        assert a.digest() != b.digest()


class TestReplicates:
    def test_bitwise_deterministic(self, small_config):
        a = run_replicate(small_config, 2)
        b = run_replicate(small_config, 2)
        assert np.array_equal(a.cumulative_freq, b.cumulative_freq)
        assert np.array_equal(a.end_window_freq, b.end_window_freq)
        assert a.final_profile == b.final_profile
        for p in small_config.tracked_profiles:
            assert np.array_equal(a.series[p], b.series[p])

    def test_replicates_differ(self, small_config):
        a = run_replicate(small_config, 0)
        b = run_replicate(small_config, 1)
        assert not np.array_equal(a.cumulative_freq, b.cumulative_freq)

    def test_frequency_accounting(self, small_config):
        stats = run_replicate(small_config, 0)
        assert stats.cumulative_freq.sum() == pytest.approx(1.0, abs=1e-12)
        assert stats.end_window_freq.sum() == pytest.approx(1.0, abs=1e-12)
        assert stats.cumulative_freq.min() >= 0.0

    def test_absorbing_start(self, staghunt):
        params = make_params(epsilon=0.06, nu=0.06, lam=0.0, mode="pla")
        config = ExperimentConfig(
            game=staghunt, params=params, horizon=2000, runs=1, seed=5,
            initial={"type": "pss", "profile": BB},
        )
        stats = run_replicate(config, 0)
        assert stats.cumulative_freq[BB] == 1.0
        assert stats.end_window_freq[BB] == 1.0
        assert stats.final_profile == BB
        assert all(stats.series[BB] == 1.0)

    def test_backend_equivalence(self, small_config):
        a = run_replicate(small_config, 1, backend="numba")
        b = run_replicate(small_config, 1, backend="python")
        assert np.array_equal(a.cumulative_freq, b.cumulative_freq)
        assert a.final_profile == b.final_profile
        assert a.max_simplex_drift == b.max_simplex_drift

    def test_raw_path_retention(self, staghunt, staghunt_apla):
        config = ExperimentConfig(
            game=staghunt, params=staghunt_apla, horizon=100, runs=1, seed=9,
            keep_raw=True,
        )
        stats = run_replicate(config, 0)
        assert stats.path is not None and stats.path.shape == (100,)

    def test_stream_independence(self):
        a = replicate_rng(123, 0).random(8)
        b = replicate_rng(123, 1).random(8)
        c = replicate_rng(124, 0).random(8)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestExperiment:
    def test_report_bitwise_reproducible(self, small_config):
        a = run_experiment(small_config, tool_version="t")
        b = run_experiment(small_config, tool_version="t")
        assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(
            b.to_dict(), sort_keys=True
        )

    def test_parallel_serial_equivalence(self, small_config):
        serial = run_experiment(small_config, threads=1, tool_version="t")
        parallel = run_experiment(small_config, threads=4, tool_version="t")
        assert json.dumps(serial.to_dict(), sort_keys=True) == json.dumps(
            parallel.to_dict(), sort_keys=True
        )

    def test_single_run_zero_std(self, staghunt, staghunt_apla):
        config = ExperimentConfig(
            game=staghunt, params=staghunt_apla, horizon=1000, runs=1, seed=3
        )
        report = run_experiment(config)
        assert all(v == 0.0 for v in report.aggregate["cumulative_freq"]["std"])
        assert all(v == 0.0 for v in report.aggregate["end_window_freq"]["std"])

    def test_mean_within_run_range(self, small_config):
        report = run_experiment(small_config)
        rows = np.stack([r.end_window_freq for r in report.runs])
        mean = np.asarray(report.aggregate["end_window_freq"]["mean"])
        assert np.all(mean <= rows.max(axis=0) + 1e-15)
        assert np.all(mean >= rows.min(axis=0) - 1e-15)

    def test_cumulative_trend_along_horizon(self, staghunt, staghunt_apla):
        # the cumulative payoff-dominant frequency should not sag as the
        # horizon grows (within a small stochastic slack)
        config = ExperimentConfig(
            game=staghunt, params=staghunt_apla, horizon=100_000, runs=5, seed=77
        )
        report = run_experiment(config)
        series = report.aggregate["series"][str(AA)]
        times = np.asarray(series["times"])
        means = np.asarray(series["mean"])
        early = means[np.searchsorted(times, 50_000)]
        late = means[-1]
        assert late >= early - 0.05

    def test_csv_layout(self, tmp_path, small_config):
        report = run_experiment(small_config)
        out = tmp_path / "series.csv"
        write_series_csv(report, str(out))
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "run,t,profile,cumulative_freq"
        expected = small_config.runs * len(small_config.tracked_profiles) * len(
            report.runs[0].series_times
        )
        assert len(lines) == 1 + expected
        run, t, profile, freq = lines[1].split(",")
        assert int(run) == 0 and int(t) >= 1 and 0.0 <= float(freq) <= 1.0


class TestComparePrediction:
    def test_staghunt_apla_match(self, staghunt, staghunt_apla):
        config = ExperimentConfig(
            game=staghunt, params=staghunt_apla, horizon=50_000, runs=4, seed=20250810
        )
        report = run_experiment(config)
        verdict = compare_prediction(staghunt, staghunt_apla, report)
        assert verdict["predicted_stable_set"] == [AA]
        assert verdict["observed_mode"] == AA
        assert verdict["match"] and verdict["explanation"] is None
        assert verdict["margin"] > 0.5

    def test_staghunt_pla_match(self, staghunt, staghunt_pla):
        config = ExperimentConfig(
            game=staghunt, params=staghunt_pla, horizon=50_000, runs=4, seed=20250810
        )
        report = run_experiment(config)
        verdict = compare_prediction(staghunt, staghunt_pla, report)
        assert verdict["predicted_stable_set"] == [BB]
        assert verdict["observed_mode"] == BB
        assert verdict["match"]

    def test_no_tremble_guard(self, staghunt):
        params = make_params(epsilon=0.06, nu=0.06, lam=0.0, mode="pla")
        config = ExperimentConfig(
            game=staghunt, params=params, horizon=500, runs=1, seed=1,
            initial={"type": "pss", "profile": AA},
        )
        report = run_experiment(config)
        verdict = compare_prediction(staghunt, params, report)
        assert "not ergodic" in verdict["explanation"]
