"""
Unit tests for wires, canonical forms and webs
"""

import itertools
import os
import sys

import numpy as np
import pytest
from scipy.optimize import minimize

# Add repo root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.errors import DimensionMismatchError, NotCanonicalError, ResourceError, SizeGuardError
from src.numerics.linalg import CZ, H, MINUS, PLUS, fidelity, kron, random_state, random_unitary
from src.resource import (
    SiteTensor,
    WireResource,
    expand_state,
    make_canonical_wire,
    make_cluster_wire,
    make_product_wire,
    make_theta_wire,
    make_web,
    to_canonical,
)


def contract_wire(wire, bits, reverse=False):
    """<R| A[s_N] ... A[s_1] |L> by explicit matrix products"""
    base = wire.base
    steps = list(zip(range(1, base.N + 1), bits))
    if reverse:
        steps.reverse()
    v = base.left
    for column, s in steps:
        v = base.site(column).matrix(s) @ v
    return np.vdot(base.right, v)


def naive_wire_state(wire, reverse=False):
    return np.array(
        [contract_wire(wire, bits, reverse) for bits in itertools.product(range(2), repeat=wire.N)]
    )


def naive_web_state(upper, lower, gates):
    """Two-wire web amplitudes; ``gates`` maps a column to the unitary applied after it"""
    n = upper.N
    left = kron(upper.base.left, lower.base.left)
    right = kron(upper.base.right, lower.base.right)
    amplitudes = []
    for bits in itertools.product(range(2), repeat=2 * n):
        v = left
        for column in range(1, n + 1):
            a = upper.base.site(column).matrix(bits[column - 1])
            b = lower.base.site(column).matrix(bits[n + column - 1])
            v = kron(a, b) @ v
            if column in gates:
                v = gates[column] @ v
        amplitudes.append(np.vdot(right, v))
    return np.array(amplitudes)


def scan_rank_one_vector(a0, a1):
    """Grid search plus simplex refinement for |m> with A[m]|1> = 0"""

    def vector(params):
        return np.array([np.cos(params[0]), np.exp(1j * params[1]) * np.sin(params[0])])

    def leak(params):
        m = vector(params)
        return float(np.linalg.norm((np.conj(m[0]) * a0 + np.conj(m[1]) * a1)[:, 1]))

    grid = [(t, f) for t in np.linspace(0, np.pi / 2, 61) for f in np.linspace(-np.pi, np.pi, 121)]
    fit = minimize(
        leak,
        np.array(min(grid, key=leak)),
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000},
    )
    return vector(fit.x), fit.fun


@pytest.mark.unit
class TestWireResource:
    """Construction and validation of plain wires"""

    def test_boundaries_are_normalized(self):
        wire = make_theta_wire(0.3, 4, left=np.array([3.0, 4.0]))
        assert np.linalg.norm(wire.base.left) == pytest.approx(1.0)
        assert wire.N == 4

    def test_single_site_wire_rejected(self):
        with pytest.raises(ResourceError):
            make_cluster_wire(1)

    def test_zero_boundary_rejected(self):
        with pytest.raises(ResourceError):
            make_cluster_wire(3, left=np.zeros(2))

    def test_boundary_dimension_checked(self):
        with pytest.raises(DimensionMismatchError):
            make_cluster_wire(3, right=np.ones(3))

    def test_site_tensor_shape_checked(self):
        with pytest.raises(DimensionMismatchError):
            SiteTensor(np.zeros((2, 2, 3)))

    def test_columns_are_one_based(self):
        wire = make_cluster_wire(3).base
        assert wire.site(1) is wire.site(3)
        with pytest.raises(IndexError):
            wire.site(0)

    def test_with_length_keeps_boundaries(self):
        wire = make_theta_wire(0.2, 3, left=PLUS)
        longer = wire.with_length(7)
        assert longer.N == 7
        np.testing.assert_allclose(longer.base.left, PLUS)
        assert longer.r1 == pytest.approx(wire.r1)


@pytest.mark.unit
class TestCanonicalForm:
    """Rank-one basis data of the built-in families"""

    @pytest.mark.parametrize("theta", [0.05, np.pi / 8, 0.5, np.pi / 4])
    def test_theta_wire_overlap(self, theta):
        wire = make_theta_wire(theta, 3)
        assert wire.r1 == pytest.approx(np.cos(2 * theta), abs=1e-10)
        assert wire.r0**2 + wire.r1**2 == pytest.approx(1.0)
        assert wire.reconstruction_residual() < 1e-8

    def test_theta_wire_phi_basis_is_x_basis(self):
        wire = make_theta_wire(np.pi / 8, 3)
        assert fidelity(wire.phi_basis[:, 0], PLUS) == pytest.approx(1.0)
        assert fidelity(wire.phi_basis[:, 1], MINUS) == pytest.approx(1.0)

    def test_cluster_wire_is_degenerate_free(self):
        wire = make_cluster_wire(4)
        assert wire.r1 == pytest.approx(0.0, abs=1e-12)
        assert wire.family == "cluster"
        np.testing.assert_allclose(np.abs(wire.m_basis), np.eye(2), atol=1e-10)

    def test_m_basis_is_orthonormal(self):
        wire = make_theta_wire(0.4, 3)
        np.testing.assert_allclose(wire.m_basis.conj().T @ wire.m_basis, np.eye(2), atol=1e-12)

    def test_m_prime_vectors_overlap_by_r1(self):
        wire = make_theta_wire(np.pi / 8, 3)
        m_prime = wire.m_prime_basis
        assert abs(np.vdot(m_prime[:, 0], m_prime[:, 1])) == pytest.approx(wire.r1)

    def test_general_canonical_family(self):
        wire = make_canonical_wire(H, 0.3, 4)
        assert 0.0 <= wire.r1 < 1.0
        assert wire.reconstruction_residual() < 1e-8

    def test_to_canonical_matches_theta_constructor(self):
        theta = 0.35
        a0 = np.cos(theta) * H
        a1 = np.sin(theta) * H @ np.diag([1, -1])
        assert to_canonical(a0, a1).r1 == pytest.approx(np.cos(2 * theta), abs=1e-10)

    def test_theta_round_trip(self):
        rng = np.random.default_rng(11)
        for theta in rng.uniform(0.05, np.pi / 4, 50):
            site = make_theta_wire(theta, 3).base.site(1)
            wire = to_canonical(site.matrix(0), site.matrix(1))
            assert wire.r1 == pytest.approx(np.cos(2 * theta), abs=1e-10)

    def test_random_su2_family_against_basis_scan(self):
        alpha = 0.3
        u = random_unitary(np.random.default_rng(17))
        w = u / np.sqrt(np.linalg.det(u))
        a0, a1 = w, w @ np.diag([np.exp(-1j * alpha), np.exp(1j * alpha)])
        wire = to_canonical(a0, a1)

        scanned, leak = scan_rank_one_vector(a0, a1)
        assert leak < 1e-8
        assert fidelity(scanned, wire.m_basis[:, 0]) == pytest.approx(1.0, abs=1e-8)
        assert wire.reconstruction_residual() <= 1e-8
        assert wire.r1 == pytest.approx(np.cos(alpha), abs=1e-10)
        assert wire.r0 == pytest.approx(np.sin(alpha), abs=1e-10)

    def test_non_canonical_tensor_rejected(self):
        with pytest.raises(NotCanonicalError):
            to_canonical(np.diag([1.0, 0.0]), np.diag([0.0, 0.5]))

    @pytest.mark.parametrize("theta", [0.0, -0.1, 2.0])
    def test_theta_out_of_range(self, theta):
        with pytest.raises(ResourceError):
            make_theta_wire(theta, 3)


@pytest.mark.unit
class TestWebAndExpansion:
    """Coupled webs and the dense expansion"""

    @pytest.fixture
    def wires(self):
        return [make_theta_wire(np.pi / 8, 4), make_theta_wire(np.pi / 8, 4)]

    def test_couplings_sorted_by_column(self, wires):
        web = make_web(wires + [make_theta_wire(np.pi / 8, 4)], [(1, 3), (0, 2)])
        assert [(c.upper, c.column) for c in web.couplings] == [(0, 2), (1, 3)]
        assert web.M == 3 and web.N == 4
        assert all(c.is_cz for c in web.couplings)
        np.testing.assert_allclose(web.couplings[0].unitary, CZ)

    def test_mismatched_lengths_rejected(self, wires):
        with pytest.raises(ResourceError):
            make_web([wires[0], make_theta_wire(np.pi / 8, 5)])

    def test_coupling_column_range(self, wires):
        with pytest.raises(ResourceError):
            make_web(wires, [(0, 5)])
        with pytest.raises(ResourceError):
            make_web(wires, [(1, 2)])

    def test_web_needs_two_wires(self, wires):
        with pytest.raises(ResourceError):
            make_web(wires[:1])

    def test_expanded_wire_is_normalized(self):
        psi = expand_state(make_theta_wire(0.3, 6))
        assert psi.shape == (2**6,)
        assert np.linalg.norm(psi) == pytest.approx(1.0)

    def test_expanded_web_is_normalized(self, wires):
        psi = expand_state(make_web(wires, [(0, 2)]))
        assert psi.shape == (2**8,)
        assert np.linalg.norm(psi) == pytest.approx(1.0)

    def test_wire_matches_bitstring_contraction(self):
        rng = np.random.default_rng(23)
        wire = make_theta_wire(np.pi / 8, 5, left=random_state(rng), right=random_state(rng))
        assert fidelity(expand_state(wire), naive_wire_state(wire)) >= 1 - 1e-12

    def test_cluster_pair_matches_bitstring_contraction(self):
        wire = make_cluster_wire(2, left=PLUS, right=PLUS)
        assert fidelity(expand_state(wire), naive_wire_state(wire)) >= 1 - 1e-12

    def test_reversed_matrix_order_differs(self):
        rng = np.random.default_rng(29)
        wire = make_theta_wire(np.pi / 8, 5, left=random_state(rng), right=random_state(rng))
        psi = expand_state(wire)
        assert fidelity(psi, naive_wire_state(wire, reverse=True)) < 1 - 1e-6

    def test_cz_web_matches_dense_contraction(self):
        upper, lower = make_cluster_wire(6), make_cluster_wire(6)
        psi = expand_state(make_web([upper, lower], [(0, 3)]))
        assert fidelity(psi, naive_web_state(upper, lower, {3: CZ})) >= 1 - 1e-10
        assert fidelity(psi, naive_web_state(upper, lower, {})) < 1 - 1e-6

    def test_theta_web_matches_dense_contraction(self):
        rng = np.random.default_rng(31)
        upper = make_theta_wire(np.pi / 8, 5, left=random_state(rng))
        lower = make_theta_wire(np.pi / 8, 5, left=random_state(rng))
        psi = expand_state(make_web([upper, lower], [(0, 3)]))
        assert fidelity(psi, naive_web_state(upper, lower, {3: CZ})) >= 1 - 1e-10

    def test_coupling_acts_upper_wire_first(self):
        cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        upper, lower = make_cluster_wire(4, left=PLUS), make_cluster_wire(4)
        psi = expand_state(make_web([upper, lower], [(0, 2, cnot)]))
        assert fidelity(psi, naive_web_state(upper, lower, {2: cnot})) >= 1 - 1e-10

    def test_decoupled_web_is_a_product(self, wires):
        psi = expand_state(make_web(wires))
        assert fidelity(psi, kron(expand_state(wires[0]), expand_state(wires[1]))) >= 1 - 1e-12

    def test_product_wire_expands_to_basis_state(self):
        psi = expand_state(make_product_wire(3))
        assert abs(psi[0]) == pytest.approx(1.0)

    def test_size_guard(self):
        with pytest.raises(SizeGuardError):
            expand_state(make_cluster_wire(21))

    def test_product_wire_is_not_canonical(self):
        wire = make_product_wire(3)
        assert isinstance(wire, WireResource)
        with pytest.raises(NotCanonicalError):
            to_canonical(wire.site(1).matrix(0), wire.site(1).matrix(1))
