"""
Unit tests for the measurement engine and its state-vector oracle
"""

import itertools
import json
import os
import sys

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.errors import (
    CompletenessError,
    DimensionMismatchError,
    EndOfWireError,
    IllegalStepError,
    SimulationError,
    SiteConsumedError,
    ZeroProbabilityError,
)
from src.numerics.linalg import PLUS, X, Z, apply_on_axes, dagger, fidelity, random_unitary
from src.resource import expand_state, make_cluster_wire, make_theta_wire, make_web
from src.simulator import (
    MeasurementOp,
    PauliFrame,
    Site,
    apply_measurement,
    export_transcript,
    init_state,
    oracle_check,
    oracle_site_density,
    outcome_distribution,
    pauli_measurement,
    readout_distribution,
    release_site,
    retain_site,
    schmidt_coefficients,
    shot_seed,
    site_density,
)
from src.simulator.rng import stream
from src.simulator.transcript import transcript_frame


@pytest.fixture
def theta_wire():
    return make_theta_wire(np.pi / 8, 6, left=np.array([0.6, 0.8j]))


@pytest.mark.unit
class TestMeasurementOp:
    """Kraus validation and frame algebra"""

    def test_incomplete_operators_rejected(self):
        with pytest.raises(CompletenessError):
            MeasurementOp(operators=(np.diag([1.0, 0.0]),))

    def test_label_count_checked(self):
        with pytest.raises(DimensionMismatchError):
            MeasurementOp.projective(np.eye(2), labels=("only",))

    def test_projective_elements_are_rank_one(self):
        op = pauli_measurement("X")
        u, v = op.rank_one(0)
        assert abs(np.vdot(u, PLUS)) == pytest.approx(1.0)
        assert op.labels == ("+", "-")

    def test_unknown_pauli_axis(self):
        with pytest.raises(ValueError):
            pauli_measurement("W")

    def test_frame_toggle_and_correction(self):
        frame = PauliFrame.identity(2).toggle(1, x=1).toggle(1, z=1)
        assert frame.get(0) == (0, 0)
        assert frame.get(1) == (1, 1)
        np.testing.assert_allclose(frame.correction(1) @ frame.operator(1), np.eye(2), atol=1e-15)
        np.testing.assert_allclose(frame.operator(1), X @ Z)

    def test_frame_powers_are_bits(self):
        with pytest.raises(ValueError):
            PauliFrame((2,), (0,))


@pytest.mark.unit
class TestMeasurementEngine:
    """Exact outcome statistics, state updates and illegal steps"""

    def test_distributions_are_normalized(self, theta_wire):
        state = init_state(theta_wire, seed=1)
        for axis in ("X", "Y", "Z"):
            p = outcome_distribution(state, pauli_measurement(axis), state.cursor_site(0))
            assert p.sum() == pytest.approx(1.0)
            assert np.all(p >= 0)

    def test_same_seed_same_outcomes(self, theta_wire):
        def run(seed):
            state = init_state(theta_wire, seed=seed)
            for _ in range(5):
                state, _ = apply_measurement(state, pauli_measurement("X"), state.cursor_site(0))
            return state.outcomes()

        assert run(42) == run(42)
        assert len(run(42)) == 5

    def test_forced_zero_probability_outcome(self):
        # left boundary |0> fixes site 1 of a cluster wire to |0>
        state = init_state(make_cluster_wire(4), seed=0)
        p = outcome_distribution(state, pauli_measurement("Z"), Site(0, 1))
        np.testing.assert_allclose(p, [1.0, 0.0], atol=1e-12)
        with pytest.raises(ZeroProbabilityError):
            apply_measurement(state, pauli_measurement("Z"), Site(0, 1), forced_outcome=1)

    def test_consumed_site_rejected(self, theta_wire):
        state = init_state(theta_wire)
        state, _ = apply_measurement(state, pauli_measurement("Z"), Site(0, 1))
        with pytest.raises(SiteConsumedError):
            apply_measurement(state, pauli_measurement("Z"), Site(0, 1))

    def test_end_of_wire(self):
        state = init_state(make_theta_wire(0.3, 2))
        for _ in range(2):
            state, _ = apply_measurement(state, pauli_measurement("X"), state.cursor_site(0))
        with pytest.raises(EndOfWireError):
            retain_site(state, 0)

    def test_retained_capacity(self, theta_wire):
        state = retain_site(retain_site(init_state(theta_wire), 0), 0)
        with pytest.raises(IllegalStepError):
            retain_site(state, 0)

    def test_cursor_needs_rank_one_outcomes(self, theta_wire):
        state = init_state(theta_wire)
        mixed = MeasurementOp(operators=(np.sqrt(0.5) * np.eye(2), np.sqrt(0.5) * np.eye(2)))
        with pytest.raises(IllegalStepError):
            apply_measurement(state, mixed, Site(0, 1))

    def test_entangled_site_cannot_be_released(self):
        state = retain_site(init_state(make_cluster_wire(4, left=PLUS)), 0)
        coefficients = schmidt_coefficients(state, Site(0, 1))
        assert coefficients[1] > 0.1
        with pytest.raises(SimulationError):
            release_site(state, Site(0, 1))

    def test_measured_retained_site_is_released(self, theta_wire):
        state = retain_site(init_state(theta_wire, seed=3), 0)
        state, _ = apply_measurement(state, pauli_measurement("Y"), Site(0, 1))
        assert state.retained == ()
        assert state.released[-1][0] == Site(0, 1)

    def test_retained_site_carries_primed_pair(self, theta_wire):
        state = retain_site(init_state(theta_wire), 0)
        lam = theta_wire.base.left
        m_prime, phi = theta_wire.m_prime_basis, theta_wire.phi_basis
        expected = sum(lam[s] * np.outer(m_prime[:, s], phi[:, s]) for s in (0, 1))
        assert state.joint.shape == (2, 2)
        assert fidelity(state.joint, expected) >= 1 - 1e-10
        assert abs(np.vdot(m_prime[:, 0], m_prime[:, 1])) == pytest.approx(np.cos(np.pi / 4), abs=1e-10)

    def test_illegal_steps_share_a_base(self):
        assert issubclass(SiteConsumedError, IllegalStepError)
        assert issubclass(EndOfWireError, IllegalStepError)
        assert not issubclass(CompletenessError, IllegalStepError)

    def test_readout_distribution(self, theta_wire):
        state = init_state(theta_wire)
        p = readout_distribution(state, theta_wire.m_basis)
        assert p.sum() == pytest.approx(1.0)


@pytest.mark.unit
class TestOracle:
    """The engine agrees with dense state-vector simulation"""

    def test_fresh_state(self, theta_wire):
        assert oracle_check(init_state(theta_wire)) <= 1e-9

    def test_mixed_transcript(self, theta_wire):
        rng = np.random.default_rng(5)
        state = init_state(theta_wire, seed=9)
        state, _ = apply_measurement(state, MeasurementOp.projective(random_unitary(rng)), Site(0, 1))
        state = retain_site(state, 0)
        assert oracle_check(state) <= 1e-9
        state, _ = apply_measurement(state, MeasurementOp.projective(random_unitary(rng)), Site(0, 3))
        state = retain_site(state, 0)
        assert oracle_check(state) <= 1e-9
        state, _ = apply_measurement(state, pauli_measurement("X"), Site(0, 2))
        assert oracle_check(state) <= 1e-9

    def test_retained_density_matches(self, theta_wire):
        state = retain_site(init_state(theta_wire, seed=2), 0)
        state, _ = apply_measurement(state, pauli_measurement("X"), state.cursor_site(0))
        np.testing.assert_allclose(
            site_density(state, Site(0, 1)), oracle_site_density(state, [Site(0, 1)]), atol=1e-10
        )

    def test_web_coupling_order(self):
        wires = [make_theta_wire(np.pi / 8, 4), make_theta_wire(np.pi / 8, 4)]
        state = init_state(make_web(wires, [(0, 2)]), seed=4)
        for _ in range(2):
            state, _ = apply_measurement(state, pauli_measurement("X"), state.cursor_site(0))
        with pytest.raises(IllegalStepError):
            apply_measurement(state, pauli_measurement("X"), state.cursor_site(0))
        for _ in range(2):
            state, _ = apply_measurement(state, pauli_measurement("Y"), state.cursor_site(1))
        assert state.applied == frozenset({0})
        state, _ = apply_measurement(state, pauli_measurement("X"), state.cursor_site(0))
        assert oracle_check(state) <= 1e-9

    def test_blocked_cursor_is_skipped(self):
        wires = [make_theta_wire(np.pi / 8, 4), make_theta_wire(np.pi / 8, 4)]
        state = init_state(make_web(wires, [(0, 2)]), seed=4)
        for _ in range(2):
            state, _ = apply_measurement(state, pauli_measurement("X"), state.cursor_site(0))
        assert oracle_check(state) <= 1e-9

    def test_completeness_failure_propagates(self, theta_wire, monkeypatch):
        def broken(*args, **kwargs):
            raise CompletenessError("branch weights sum to 0.9 of the norm")

        monkeypatch.setattr("src.simulator.oracle.outcome_distribution", broken)
        with pytest.raises(CompletenessError):
            oracle_check(init_state(theta_wire))

    def test_exhaustive_cluster_transcripts(self):
        n = 8
        wire = make_cluster_wire(n, left=PLUS)
        rng = np.random.default_rng(13)
        bases = [random_unitary(rng) for _ in range(n)]
        ops = [MeasurementOp.projective(basis) for basis in bases]

        psi = expand_state(wire).reshape((2,) * n)
        for axis, basis in enumerate(bases):
            psi = apply_on_axes(psi, dagger(basis), [axis])
        oracle = np.abs(psi.reshape(-1)) ** 2

        simulated = []
        for outcomes in itertools.product(range(2), repeat=n):
            state = init_state(wire)
            for column, (op, outcome) in enumerate(zip(ops, outcomes), start=1):
                state, _ = apply_measurement(state, op, Site(0, column), forced_outcome=outcome)
            simulated.append(np.prod([r.probability for r in state.transcript]))
        simulated = np.array(simulated)

        assert simulated.sum() == pytest.approx(1.0, abs=1e-10)
        assert 0.5 * np.sum(np.abs(simulated - oracle)) <= 1e-9


@pytest.mark.unit
class TestSeedsAndTranscripts:
    """Seed derivation and transcript export"""

    def test_shot_seeds_are_distinct_and_stable(self):
        seeds = [shot_seed(7, shot) for shot in range(50)]
        assert len(set(seeds)) == 50
        assert seeds == [shot_seed(7, shot) for shot in range(50)]
        assert shot_seed(8, 0) != shot_seed(7, 0)

    def test_streams_are_reproducible(self):
        assert stream(1, 0, 1).random() == stream(1, 0, 1).random()

    def test_transcript_export(self, theta_wire):
        state = retain_site(init_state(theta_wire, seed=1), 0)
        state, _ = apply_measurement(state, pauli_measurement("X"), Site(0, 2))
        lines = export_transcript(state).splitlines()
        assert len(lines) == 2
        records = [json.loads(line) for line in lines]
        assert records[0]["kind"] == "retain"
        assert records[1]["column"] == 2
        assert list(records[1]) == sorted(records[1])
        assert list(transcript_frame(state)["kind"]) == ["retain", "measure"]
