import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from repint.generators import (IntegrationError, NonUniqueSteadyStateError, ThermalBathSpec, dissipator,
                               hamiltonian_superop, heat_rate, ldb_audit, lindbladian, propagate, spohn_functional,
                               spost, spre, steady_state, thermal_generator, thermal_jumps, unvec, vec)
from repint.operators import gibbs_state, sample_hermitian, sample_state, sigma_x, sigma_z


def test_vec_conventions():
    A, B, X = sample_hermitian(1, 3), sample_hermitian(2, 3), sample_state(3, 3)
    assert np.allclose(spre(A) @ vec(X), vec(A @ X))
    assert np.allclose(spost(B) @ vec(X), vec(X @ B))
    assert np.allclose(unvec(vec(X)), X)


def test_lindbladian_matches_direct_formula():
    H = sample_hermitian(4, 2)
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    rho = sample_state(5, 2)
    direct = -1j * (H @ rho - rho @ H) + 0.3 * (a @ rho @ a.conj().T - 0.5 * (a.conj().T @ a @ rho + rho @ a.conj().T @ a))
    assert np.allclose(unvec(lindbladian(H, [(a, 0.3)]) @ vec(rho)), direct)


def test_thermal_jumps_lower_energy_with_detailed_balance():
    w = 1.3
    H = np.diag([0.0, w]).astype(complex)
    bath = ThermalBathSpec(0.7, (sigma_x(),), gamma0=0.4)
    jumps = {round(j.omega, 12): j for j in thermal_jumps(H, bath)}
    down, up = jumps[w], jumps[-w]
    assert np.allclose(down.operator, [[0, 1], [0, 0]])    # |0><1| removes energy w
    assert up.rate / down.rate == pytest.approx(math.exp(-0.7 * w))
    assert ldb_audit(bath, H) < 1e-14


@pytest.mark.parametrize("profile", ["flat", "ohmic"])
def test_gibbs_state_is_stationary(profile):
    H = sample_hermitian(6, 3, 2.0)
    bath = ThermalBathSpec(1.1, (sample_hermitian(7, 3),), profile=profile, cutoff=5.0)
    L = thermal_generator(H, bath)
    assert np.max(np.abs(L @ vec(gibbs_state(H, 1.1)))) < 1e-12
    assert np.allclose(steady_state(L), gibbs_state(H, 1.1), atol=1e-10)


def test_spohn_inequality_and_heat_sign():
    H = sample_hermitian(8, 3, 2.0)
    beta = 0.9
    bath = ThermalBathSpec(beta, (sample_hermitian(9, 3),))
    Ld = thermal_generator(H, bath, hamiltonian=False)
    L = Ld + hamiltonian_superop(H)
    g = gibbs_state(H, beta)
    for s in range(20):
        rho = sample_state(100 + s, 3)
        sigma = spohn_functional(L, rho, g)
        assert sigma >= -1e-12
        # entropy production = dS/dt - beta Q
        dS = -np.real(np.trace(unvec(L @ vec(rho)) @ _logm(rho)))
        assert sigma == pytest.approx(dS - beta * heat_rate(H, Ld, rho), abs=1e-10)


def _logm(rho):
    w, v = np.linalg.eigh(rho)
    return (v * np.log(w)) @ v.conj().T


def test_propagate_time_dependent_against_solve_ivp():
    H0, A = sigma_z() / 2, sigma_x()
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    L = lambda t: lindbladian(H0 + 0.5 * math.sin(t) * A, [(a, 0.2)])
    rho0 = sample_state(10, 2)
    out = propagate(L, rho0, 0.0, 2.0, dt_max=1e-2)
    sol = solve_ivp(lambda t, y: L(t) @ y, (0, 2), vec(rho0).astype(complex), rtol=1e-11, atol=1e-12)
    assert np.allclose(out, unvec(sol.y[:, -1]), atol=1e-9)


def test_propagate_warns_on_coarse_steps():
    L = lambda t: hamiltonian_superop(5 * math.cos(3 * t) * sigma_x())
    with pytest.warns(RuntimeWarning):
        propagate(L, np.diag([1.0, 0]).astype(complex), 0, 2, dt_max=0.5, richardson_tol=1e-12)


def test_propagate_detects_non_trace_preserving_generator():
    bad = -0.5 * np.eye(4)
    with pytest.raises(IntegrationError):
        propagate(bad, np.eye(2) / 2, 0, 1)


def test_steady_state_non_unique():
    with pytest.raises(NonUniqueSteadyStateError):
        steady_state(hamiltonian_superop(sigma_z()))


def test_dissipator_trace_preserving():
    a = sample_hermitian(11, 3) + 1j * sample_hermitian(12, 3)
    D = dissipator(a)
    assert np.max(np.abs(vec(np.eye(3)).conj() @ D)) < 1e-12
