"""
Unit tests for the shot runner
"""

import os
import sys

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.cli import runner
from src.cli.config import ExperimentConfig
from src.cli.runner import (
    build_experiment,
    random_transcript_check,
    run_batch,
    run_shot,
    shot_target,
    summarize,
    write_outputs,
)
from src.compiler import MeasurementPattern, PatternStep
from src.errors import CompletenessError
from src.numerics.linalg import H, fidelity, rz


@pytest.fixture
def cluster_config(tmp_path):
    return ExperimentConfig.model_validate(
        {
            "name": "cluster-unit",
            "seed": 3,
            "shots": 4,
            "resource": {"family": "cluster", "n": 12},
            "protocol": {"kind": "simple", "epsilon": 1e-6, "oracle": True},
            "output": {"dir": str(tmp_path / "out")},
        }
    )


@pytest.fixture
def theta_config(tmp_path):
    return ExperimentConfig.model_validate(
        {
            "name": "theta-unit",
            "seed": 5,
            "shots": 6,
            "resource": {"family": "theta", "theta": 0.39269908169872414},
            "protocol": {"kind": "general", "epsilon": 1e-3, "trials": 3},
            "output": {"dir": str(tmp_path / "out"), "transcripts": True},
        }
    )


@pytest.fixture
def web_config(tmp_path):
    return ExperimentConfig.model_validate(
        {
            "name": "web-unit",
            "seed": 7,
            "shots": 2,
            "resource": {"family": "cluster", "n": 8, "wires": 2, "couplings": [{"upper": 0, "column": 3}]},
            "protocol": {
                "kind": "web",
                "epsilon": 1e-6,
                "circuit": [
                    {"gate": "H", "wire": 0},
                    {"gate": "H", "wire": 1},
                    {"op": "coupling", "wire": 0},
                    {"gate": "H", "wire": 1},
                ],
            },
            "output": {"dir": str(tmp_path / "out")},
        }
    )


@pytest.mark.unit
class TestBuildExperiment:
    """Resource sizing"""

    def test_fixed_length(self, cluster_config):
        experiment = build_experiment(cluster_config)
        assert experiment.wire.N == 12
        assert experiment.trials == 1
        assert experiment.r1 == pytest.approx(0.0, abs=1e-12)

    def test_auto_length_holds_worst_case(self, theta_config):
        experiment = build_experiment(theta_config)
        assert experiment.trials == 3
        assert experiment.wire.N > 2 * 3 * 2

    def test_random_targets_depend_on_seed_only(self, theta_config):
        a, b = shot_target(theta_config, 11), shot_target(theta_config, 11)
        np.testing.assert_allclose(a, b)
        assert np.linalg.norm(a) == pytest.approx(1.0)
        assert fidelity(a, shot_target(theta_config, 12)) < 1.0


@pytest.mark.unit
class TestShots:
    """Single shots and batches"""

    def test_cluster_shot(self, cluster_config):
        report = run_shot(cluster_config, 0)
        assert report.success and report.error is None
        assert report.fidelity >= 1 - 1e-9
        assert report.oracle_deviation is not None and report.oracle_deviation <= 1e-9
        assert not report.wires[0].filtered

    def test_shots_are_reproducible(self, theta_config):
        assert run_shot(theta_config, 2).model_dump() == run_shot(theta_config, 2).model_dump()

    def test_theta_shots_record_phases(self, theta_config):
        for report in run_batch(theta_config):
            wire = report.wires[0]
            assert wire.filtered
            assert 1 <= wire.phase1_trials <= 3 or not wire.phase1_attempted
            if report.success:
                assert report.fidelity >= 1 - 1e-9
                assert wire.min_factorization is None or wire.min_factorization >= 1 - 1e-10
            assert report.transcript

    def test_web_shot(self, web_config):
        report = run_shot(web_config, 0)
        assert report.success
        assert len(report.wires) == 2
        assert report.fidelity >= 1 - 1e-9

    def test_batch_is_ordered(self, cluster_config):
        reports = run_batch(cluster_config, jobs=2)
        assert [r.shot for r in reports] == [0, 1, 2, 3]


@pytest.mark.unit
class TestSummaryAndOutputs:
    """Checks and artifacts"""

    def test_cluster_summary_passes(self, cluster_config):
        summary, stats = summarize(cluster_config, run_batch(cluster_config))
        assert summary["passed"]
        assert summary["checks"]["oracle_agreement"]
        assert stats.joint.p_hat == 1.0

    def test_outputs(self, theta_config, tmp_path):
        reports = run_batch(theta_config)
        summary, stats = summarize(theta_config, reports)
        out = write_outputs(tmp_path / "artifacts", reports, summary, stats)
        assert (out / "shots.csv").exists()
        assert len(list((out / "transcripts").iterdir())) == theta_config.shots
        assert "transcript" not in (out / "report.jsonl").read_text().splitlines()[0]


@pytest.mark.unit
class TestOracleTranscripts:
    """Random transcripts agree with the state-vector oracle"""

    @pytest.mark.parametrize("index", range(6))
    def test_random_transcript(self, index):
        assert random_transcript_check(17, index) <= 1e-9

    def test_completeness_failure_is_not_skipped(self, monkeypatch):
        def broken(*args, **kwargs):
            raise CompletenessError("branch weights sum to 0.9 of the norm")

        monkeypatch.setattr(runner, "apply_measurement", broken)
        with pytest.raises(CompletenessError):
            random_transcript_check(17, 0, max_steps=40)


@pytest.mark.unit
class TestExhaustedPreparation:
    """A prep that runs out of attempts is a failed shot, not a run error"""

    SHOTS = 30

    @pytest.fixture
    def one_attempt_prep(self, monkeypatch):
        pattern = MeasurementPattern(
            family="theta", steps=(PatternStep(np.pi / 2, 1),), target=H @ rz(np.pi / 2)
        )
        monkeypatch.setattr(runner, "compile_prep", lambda *args, **kwargs: pattern)
        return pattern

    def test_reported_as_failure(self, theta_config, one_attempt_prep):
        config = theta_config.model_copy(update={"shots": self.SHOTS})
        reports = run_batch(config, jobs=1)
        unprepared = [r for r in reports if not r.wires[0].phase1_attempted]
        assert unprepared
        for report in unprepared:
            assert report.error is None
            assert not report.success
            assert not report.wires[0].phase3_attempted
            assert report.wires[0].phase1_trials == 0

        summary, stats = summarize(config, reports)
        assert summary["errors"] == 0
        assert summary["checks"]["no_errors"]
        assert summary["prep_failures"] == len(unprepared)
        assert stats.phases[0].attempts == self.SHOTS - len(unprepared)
        assert stats.joint.attempts == self.SHOTS - len(unprepared)
