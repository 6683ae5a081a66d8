"""
Unit tests for spectra, correlators, entropies and success statistics
"""

import math
import os
import sys

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.analysis import (
    bond_entropy_profile,
    closed_form_xi,
    correlation_decay,
    correlation_length,
    entropy_table,
    expectation,
    local_entropy,
    success_stats,
    transfer_spectrum,
    truncated_geometric,
    two_point_correlator,
    xi_table,
)
from src.errors import DimensionMismatchError
from src.numerics.linalg import X, Z
from src.resource import make_cluster_wire, make_product_wire, make_theta_wire
from src.resource.expansion import expand_state

THETA = np.pi / 8


@pytest.mark.unit
class TestSpectrum:
    """Correlation lengths from the transfer matrix"""

    def test_theta_pi_over_8(self):
        assert correlation_length(make_theta_wire(THETA, 4)).xi == pytest.approx(5.77078, abs=1e-4)
        assert closed_form_xi(THETA) == pytest.approx(5.77078, abs=1e-4)

    @pytest.mark.parametrize("theta", np.linspace(math.pi / 80, math.pi / 4, 20))
    def test_spectral_matches_closed_form(self, theta):
        spectrum = correlation_length(make_theta_wire(theta, 4))
        assert abs(spectrum.ratio - math.sqrt(max(math.cos(2 * theta), 0.0))) <= 1e-9

    def test_pi_over_4_has_no_correlations(self):
        assert correlation_length(make_theta_wire(math.pi / 4, 4)).xi == 0.0
        assert closed_form_xi(math.pi / 4) == 0.0

    def test_two_site_block(self):
        wire = make_theta_wire(THETA, 4)
        spectrum = transfer_spectrum(wire, block=2)
        assert spectrum.ratio == pytest.approx(wire.r1, abs=1e-9)
        assert spectrum.xi == pytest.approx(correlation_length(wire).xi, rel=1e-9)

    def test_xi_table_columns(self):
        table = xi_table([0.1, 0.3])
        assert list(table.columns) == [
            "theta", "r1", "decay_spectral", "decay_closed_form", "xi_spectral", "xi_closed_form",
        ]
        np.testing.assert_allclose(table["xi_spectral"], table["xi_closed_form"], rtol=1e-8)


@pytest.mark.unit
class TestCorrelators:
    """Chain contractions against the dense expansion"""

    def test_expectation_matches_dense_state(self):
        wire = make_theta_wire(0.3, 6, left=np.array([0.6, 0.8]))
        psi = expand_state(wire).reshape((2,) * 6)
        dense = np.einsum("ab...,ab...->", np.conj(psi), np.einsum("ij,ajc...->aic...", Z, psi))
        assert expectation(wire, {2: Z}).real == pytest.approx(dense.real, abs=1e-10)

    def test_same_site_rejected(self):
        with pytest.raises(DimensionMismatchError):
            two_point_correlator(make_theta_wire(THETA, 8), X, 3, 3)

    @pytest.mark.parametrize("theta", [math.pi / 8, math.pi / 6, math.pi / 5])
    def test_decay_rate(self, theta):
        frame, rate = correlation_decay(make_theta_wire(theta, 41), X)
        assert (frame["abs_correlator"] > 1e-13).sum() >= 2
        assert rate == pytest.approx(1.0 / closed_form_xi(theta), rel=0.05)

    def test_cluster_has_no_two_point_correlations(self):
        wire = make_cluster_wire(20)
        for j in (7, 9, 12):
            assert abs(two_point_correlator(wire, Z, 5, j)) <= 1e-10

    def test_decay_window_checked(self):
        with pytest.raises(DimensionMismatchError):
            correlation_decay(make_theta_wire(THETA, 10), X)


@pytest.mark.unit
class TestEntropy:
    """Single-site and bond entropies"""

    def test_cluster_site_is_maximally_mixed(self):
        assert local_entropy(make_cluster_wire(9)) == pytest.approx(1.0, abs=1e-9)

    def test_weak_theta_is_nearly_product(self):
        assert local_entropy(make_theta_wire(0.05, 21)) < 0.1

    def test_product_wire(self):
        assert local_entropy(make_product_wire(5)) == pytest.approx(0.0, abs=1e-9)

    def test_entropy_grows_with_theta(self):
        table = entropy_table([0.05, 0.2, 0.5])
        assert table["entropy_bits"].is_monotonic_increasing

    def test_bond_profile(self):
        profile = bond_entropy_profile(make_theta_wire(THETA, 6))
        assert list(profile["cut"]) == [1, 2, 3, 4, 5]
        assert (profile["entropy_bits"] <= 1.0 + 1e-9).all()


@pytest.mark.unit
class TestSuccessStatistics:
    """Binomial intervals and the truncated geometric trial law"""

    @staticmethod
    def _shot(ok1, ok3, k1=1, k3=1):
        return {
            "success": ok1 and ok3,
            "wires": [
                {
                    "phase1_attempted": True,
                    "phase1_success": ok1,
                    "phase1_trials": k1,
                    "phase3_attempted": ok1,
                    "phase3_success": ok3,
                    "phase3_trials": k3,
                }
            ],
        }

    def test_truncated_geometric(self):
        law = truncated_geometric(0.5, 3)
        np.testing.assert_allclose(law, np.array([4, 2, 1]) / 7)

    def test_expected_frequency(self):
        r1 = math.cos(math.pi / 4)
        shots = [self._shot(True, True)] * 80 + [self._shot(True, False)] * 20
        report = success_stats(shots, r1=r1, trials=5)
        assert report.phases[0].expected == pytest.approx(0.823223, abs=1e-6)
        assert report.phases[0].p_hat == 1.0
        assert report.phases[1].p_hat == pytest.approx(0.8)
        assert report.joint.p_hat == pytest.approx(0.8)

    def test_unattempted_phase_excluded(self):
        shots = [self._shot(False, False)] * 10 + [self._shot(True, True)] * 10
        report = success_stats(shots, r1=0.5, trials=2)
        assert report.phases[1].attempts == 10

    def test_interval_contains_estimate(self):
        report = success_stats([self._shot(True, True)] * 50 + [self._shot(False, False)] * 50)
        joint = report.joint
        assert joint.ci_low < 0.5 < joint.ci_high
        assert joint.consistent is None

    def test_empty_batch(self):
        with pytest.raises(ValueError):
            success_stats([])
