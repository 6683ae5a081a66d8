"""
Acceptance runs: statistical shot batches, the oracle sweep and the
closed-form checks, each against the shipped experiment configs
"""

import math
import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.analysis import closed_form_xi, correlation_length
from src.cli.config import load_config
from src.cli.runner import oracle_sweep, run_batch, summarize, write_outputs
from src.compiler import compile_prep, compile_V, run_pattern
from src.numerics.linalg import fidelity, pauli, random_state
from src.protocol import build_filter, required_trials
from src.resource import make_theta_wire
from src.simulator import (
    apply_measurement,
    init_state,
    oracle_check,
    release_site,
    retain_site,
    schmidt_coefficients,
)

CONFIGS = Path(__file__).resolve().parents[2] / "configs"
THETA_GRID = np.linspace(math.pi / 80, math.pi / 4, 20)
R1_GRID = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, math.cos(math.pi / 4)]


def run_config(name, tmp_path, **overrides):
    config = load_config(CONFIGS / f"{name}.yaml", out=str(tmp_path / name), **overrides)
    reports = run_batch(config)
    summary, stats = summarize(config, reports)
    write_outputs(config.output.dir, reports, summary, stats)
    return summary, stats, reports


@pytest.mark.integration
class TestClosedForms:
    """Filter algebra, correlation lengths and trial bounds"""

    @pytest.mark.parametrize("r1", R1_GRID)
    def test_filter_algebra(self, r1):
        povm = build_filter(r1)
        assert povm.completeness_error() <= 1e-12
        assert np.linalg.svd(povm.Fbar, compute_uv=False)[1] <= 1e-12

    def test_correlation_length_grid(self):
        for theta in THETA_GRID:
            spectrum = correlation_length(make_theta_wire(float(theta), 4))
            decay = math.exp(-1.0 / spectrum.xi) if spectrum.xi > 0 else 0.0
            assert abs(decay - math.sqrt(max(math.cos(2 * theta), 0.0))) <= 1e-9
        assert correlation_length(make_theta_wire(math.pi / 4, 4)).xi == 0.0

    @pytest.mark.parametrize("epsilon", [1e-1, 1e-2, 1e-3])
    def test_trials_cover_correlation_length(self, epsilon):
        for theta in THETA_GRID:
            r1 = max(math.cos(2 * theta), 0.0)
            bound = 0.5 * math.log(1.0 / epsilon) * closed_form_xi(float(theta)) - 1
            assert required_trials(epsilon, r1) >= bound


@pytest.mark.integration
@pytest.mark.slow
class TestFilterStatistics:
    """Single-filter and repeat-until-success frequencies"""

    def test_single_filter(self, tmp_path):
        summary, stats, _ = run_config("theta_single_filter", tmp_path)
        assert stats.phases[0].expected == pytest.approx(1 - math.cos(math.pi / 4), abs=1e-9)
        assert stats.phases[0].consistent
        assert summary["passed"]

    def test_repeat_until_success(self, tmp_path):
        summary, stats, _ = run_config("theta_rus_l5", tmp_path)
        assert summary["errors"] == 0
        assert stats.phases[0].expected == pytest.approx(0.823223, abs=1e-6)
        assert all(p.consistent for p in stats.phases)
        assert all(p.chi2_pvalue is not None and p.chi2_pvalue > 0.01 for p in stats.phases)
        assert summary["passed"]

    def test_cluster_limit(self, tmp_path):
        summary, _, reports = run_config("theta_pi4", tmp_path)
        assert summary["passed"]
        for report in reports:
            assert all(w.phase1_trials == 1 and w.phase3_trials == 1 for w in report.wires)
            assert "fail" not in report.outcomes


@pytest.mark.integration
@pytest.mark.slow
class TestLocalization:
    """Decoded host fidelity on every success branch"""

    @pytest.mark.parametrize("name", ["cluster_simple", "cluster_random_targets", "theta_random_targets"])
    def test_success_branches_are_exact(self, name, tmp_path):
        summary, _, reports = run_config(name, tmp_path)
        assert summary["errors"] == 0
        assert summary["checks"]["success_fidelity"]
        assert all(r.fidelity >= 1 - 1e-9 for r in reports if r.success)
        if name == "cluster_random_targets":
            assert summary["checks"]["oracle_agreement"]

    def test_failed_filter_restarts_wire(self):
        rng = np.random.default_rng(2024)
        wire = make_theta_wire(math.pi / 8, 2)
        op = build_filter(wire.r1).measurement(wire.m_basis)
        v_prime = compile_V(wire, "V'", 1e-6)
        for shot in range(10):
            psi = random_state(rng)
            prep = compile_prep(wire, psi, 1e-6)
            long_wire = wire.with_length(prep.declared_length + v_prime.declared_length + 4)
            state = run_pattern(init_state(long_wire, seed=shot), prep)
            a, b = state.frame.get(0)
            site = state.cursor_site(0)
            state = retain_site(state, 0)
            state, _ = apply_measurement(state, op, site, forced_outcome=1, release=False)
            assert schmidt_coefficients(state, site)[0] >= 1 - 1e-10
            state = release_site(state, site)
            state = run_pattern(state.replace(frame=state.frame.set(0, 0, 0)), v_prime)
            e, f = state.frame.get(0)
            assert fidelity(state.joint, pauli(a ^ e, b ^ f) @ psi) >= 1 - 1e-9
            if long_wire.N <= 14:
                assert oracle_check(state) <= 1e-9


@pytest.mark.integration
@pytest.mark.slow
class TestOracleAndWebs:
    """State-vector agreement and two-wire Bell pairs"""

    def test_oracle_sweep(self):
        frame = oracle_sweep(seed=0, transcripts=200, jobs=4)
        assert len(frame) == 200
        assert frame["max_tv"].max() <= 1e-9

    @pytest.mark.parametrize("name", ["web_cluster_bell", "web_theta_bell"])
    def test_bell_pair(self, name, tmp_path):
        summary, stats, reports = run_config(name, tmp_path)
        assert summary["passed"]
        assert all(r.fidelity >= 1 - 1e-9 for r in reports if r.success)
        assert stats.joint.consistent
