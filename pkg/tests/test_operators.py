import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm, logm

from repint.operators import (DensityMatrixError, HilbertSpace, dephase, density_matrix, destroy, gibbs_state,
                              hermitian_log, mutual_information, nonequilibrium_free_energy, partial_trace,
                              permute_subsystems, relative_entropy, sample_hermitian, sample_state, sigma_x,
                              sigma_z, tensor_product, trace_distance, unitary_from, von_neumann_entropy)


def test_density_matrix_rejects_bad_input():
    with pytest.raises(DensityMatrixError):
        density_matrix(np.diag([0.7, 0.7]))
    with pytest.raises(DensityMatrixError):
        density_matrix(np.diag([1.2, -0.2]))
    with pytest.raises(DensityMatrixError):
        density_matrix([[0.5, 0.1], [0.3, 0.5]])
    with pytest.raises(DensityMatrixError):
        density_matrix(np.ones((2, 3)) / 2)


def test_partial_trace_of_product_state():
    a, b, c = sample_state(1, 2), sample_state(2, 3), sample_state(3, 2)
    rho = tensor_product(a, b, c)
    assert np.allclose(partial_trace(rho, (2, 3, 2), 0), a)
    assert np.allclose(partial_trace(rho, (2, 3, 2), 1), b)
    assert np.allclose(partial_trace(rho, (2, 3, 2), [0, 2]), np.kron(a, c))


def test_partial_trace_by_label():
    space = HilbertSpace((2, 3), ("S", "U"))
    a, b = sample_state(4, 2), sample_state(5, 3)
    assert np.allclose(partial_trace(np.kron(a, b), space, "U"), b)
    with pytest.raises(KeyError):
        space.index("R")


def test_permute_subsystems_swaps_factors():
    a, b = sample_state(6, 2), sample_state(7, 3)
    assert np.allclose(permute_subsystems(np.kron(a, b), (2, 3), [1, 0]), np.kron(b, a))


def test_entropy_of_qubit_closed_form():
    p = 0.3
    assert von_neumann_entropy(np.diag([p, 1 - p])) == pytest.approx(-p * math.log(p) - (1 - p) * math.log(1 - p))
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0


def test_bell_state_mutual_information_is_2ln2():
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert mutual_information(np.outer(psi, psi), (2, 2), 0) == pytest.approx(2 * math.log(2), abs=1e-12)


def test_relative_entropy_against_scipy_logm():
    rho, sigma = sample_state(8, 3), sample_state(9, 3)
    ref = np.real(np.trace(rho @ (logm(rho) - logm(sigma))))
    assert relative_entropy(rho, sigma) == pytest.approx(ref, abs=1e-10)


def test_relative_entropy_support_mismatch_is_infinite():
    assert relative_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])) == math.inf
    assert relative_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2) == pytest.approx(math.log(2))


def test_hermitian_log_on_support():
    L = hermitian_log(np.diag([0.5, 0.5, 0.0]))
    assert np.allclose(L, np.diag([math.log(0.5)] * 2 + [0.0]))


def test_gibbs_state_matches_expm_and_limits():
    H = sample_hermitian(10, 4, 3.0)
    ref = expm(-0.7 * H)
    assert np.allclose(gibbs_state(H, 0.7), ref / np.trace(ref))
    g = gibbs_state(np.diag([0.0, 0.0, 1.0]), math.inf)
    assert np.allclose(g, np.diag([0.5, 0.5, 0.0]))


def test_gibbs_state_large_beta_is_finite():
    g = gibbs_state(np.diag([0.0, 1.0]), 1e4)
    assert np.all(np.isfinite(g)) and g[0, 0] == pytest.approx(1.0)


def test_unitary_from_matches_expm():
    H = sample_hermitian(11, 3)
    assert np.allclose(unitary_from(H, 1.3), expm(-1.3j * H))


def test_trace_distance_orthogonal_states():
    assert trace_distance(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(1.0)


def test_gibbs_state_minimises_free_energy():
    H = np.diag([0.0, 1.0, 2.5]).astype(complex)
    T = 0.8
    F_eq = nonequilibrium_free_energy(gibbs_state(H, 1 / T), H, T)
    assert F_eq == pytest.approx(-T * math.log(np.sum(np.exp(-np.diag(H).real / T))))
    for s in range(20):
        assert nonequilibrium_free_energy(sample_state(s, 3), H, T) >= F_eq - 1e-12


def test_dephase_removes_coherence_in_energy_basis():
    rho = sample_state(12, 2)
    assert np.allclose(dephase(rho, sigma_z()), np.diag(np.diag(rho)))


def test_destroy_commutator():
    a = destroy(5)
    comm = a @ a.conj().T - a.conj().T @ a
    assert np.allclose(np.diag(comm)[:-1], 1.0)


def test_sample_hermitian_norm():
    assert np.linalg.norm(sample_hermitian(13, 4, 2.5), 2) == pytest.approx(2.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 3), st.integers(2, 3))
def test_subadditivity_and_araki_lieb(seed, dA, dB):
    rho = sample_state(seed, dA * dB)
    a, b = partial_trace(rho, (dA, dB), 0), partial_trace(rho, (dA, dB), 1)
    S, Sa, Sb = von_neumann_entropy(rho), von_neumann_entropy(a), von_neumann_entropy(b)
    assert S <= Sa + Sb + 1e-10
    assert S >= abs(Sa - Sb) - 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_relative_entropy_nonnegative_and_zero_on_diagonal(seed):
    rho, sigma = sample_state(seed, 3), sample_state(seed + 1, 3)
    assert relative_entropy(rho, sigma) >= 0
    assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-10)


def test_sigma_x_is_involution():
    assert np.allclose(sigma_x() @ sigma_x(), np.eye(2))
