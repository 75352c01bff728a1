import math

import numpy as np
import pytest
from scipy.linalg import expm

from repint.effective_me import (CenteringError, DriveMimicSpec, PoissonKickSpec, RegularKickSpec, collision_step,
                                 double_commutator_generator, drive_mimic, ensemble_rates,
                                 entropy_bookkeeping_residual, jump_superoperators, kraus_operators,
                                 operator_schmidt, poisson_generator, poisson_rates, regular_kick_generator,
                                 regular_kick_rates, trajectory_sampler)
from repint.generators import ThermalBathSpec, unvec, vec
from repint.operators import (gibbs_state, partial_trace, relative_entropy, sample_hermitian, sample_state, sigma_x,
                              sigma_z)

H_Q = np.diag([0, 1.0]).astype(complex)


def _random_kick(seed, d_S=2, d_U=2, thermal=None, bath=None):
    rng = np.random.default_rng(seed)
    H_U = sample_hermitian(rng, d_U)
    rho_U = gibbs_state(H_U, thermal) if thermal is not None else sample_state(rng, d_U)
    return PoissonKickSpec(gamma=rng.uniform(0.5, 2.0), H_S=sample_hermitian(rng, d_S), H_U=H_U, rho_U=rho_U,
                           V=sample_hermitian(rng, d_S * d_U, 1.5), bath=bath, beta_units=thermal)


def _reduced_map_oracle(U, rho_U, d_S, d_U):
    M = np.zeros((d_S * d_S,) * 2, dtype=complex)
    for j in range(d_S):
        for i in range(d_S):
            E = np.zeros((d_S, d_S))
            E[i, j] = 1
            M[:, j * d_S + i] = vec(partial_trace(U @ np.kron(E, rho_U) @ U.conj().T, (d_S, d_U), 0))
    return M


def test_kraus_map_matches_partial_trace():
    spec = _random_kick(1, 2, 3)
    J_S, _ = jump_superoperators(spec.U, spec.rho_U, spec.dims)
    assert np.allclose(J_S, _reduced_map_oracle(spec.U, spec.rho_U, 2, 3))
    ks = kraus_operators(spec.U, spec.rho_U, spec.dims)
    assert np.allclose(sum(k.conj().T @ k for k in ks), np.eye(2))


def test_unit_map_matches_partial_trace():
    spec = _random_kick(2)
    rho = sample_state(3, 2)
    _, J_U = jump_superoperators(spec.U, spec.rho_U, spec.dims, rho_S=rho)
    ref = partial_trace(spec.U @ np.kron(rho, spec.rho_U) @ spec.U.conj().T, (2, 2), 1)
    assert np.allclose(unvec(J_U @ vec(spec.rho_U)), ref)


def test_poisson_generator_is_rate_weighted_jump():
    spec = _random_kick(4)
    J = _reduced_map_oracle(spec.U, spec.rho_U, 2, 2)
    H = spec.H_S
    L0 = -1j * (np.kron(np.eye(2), H) - np.kron(H.T, np.eye(2)))
    assert np.allclose(poisson_generator(spec), L0 + spec.gamma * (J - np.eye(4)))


def test_rate_second_law_and_first_law_with_bath():
    bath = ThermalBathSpec(0.8, (sigma_x(),))
    for s in range(10):
        spec = _random_kick(10 + s, bath=bath)
        led = poisson_rates(spec, sample_state(100 + s, 2))
        assert led.Sigma_S >= led.lower_bound - 1e-9
        assert led.first_law_residual == pytest.approx(0.0, abs=1e-10)


def test_unitary_kick_entropy_bookkeeping_is_exact():
    spec = _random_kick(5)
    assert entropy_bookkeeping_residual(spec, sample_state(6, 2)) == pytest.approx(0.0, abs=1e-10)


def test_ensemble_identity_for_thermal_units():
    spec = _random_kick(7, thermal=0.9)
    rho = sample_state(8, 2)
    ens, led = ensemble_rates(spec, rho), poisson_rates(spec, rho)
    _, J_U = jump_superoperators(spec.U, spec.rho_U, spec.dims, rho_S=rho)
    D = relative_entropy(unvec(J_U @ vec(spec.rho_U)), spec.rho_U)
    assert ens.Sigma_S_bar - led.Sigma_S == pytest.approx(spec.gamma * D, abs=1e-10)
    assert ens.clausius_residual == pytest.approx(0.0, abs=1e-10)


def test_trajectory_sampler_is_seed_deterministic_and_unbiased():
    spec = _random_kick(9)
    rho0 = np.diag([1.0, 0]).astype(complex)
    times = np.linspace(0, 3, 7)
    a = trajectory_sampler(spec, rho0, times, 400, seed=3)
    b = trajectory_sampler(spec, rho0, times, 400, seed=3)
    assert np.array_equal(a.mean, b.mean)
    L = poisson_generator(spec)
    for k, t in enumerate(times):
        exact = unvec(expm(L * t) @ vec(rho0))
        assert np.all(np.abs(a.mean[k] - exact) <= 5 * a.stderr[k] + 1e-12)


def test_operator_schmidt_reconstructs():
    V = sample_hermitian(11, 6)
    pairs = operator_schmidt(V, (2, 3))
    assert np.allclose(sum(np.kron(a, b) for a, b in pairs), V)


def _exchange_regular(p=0.3):
    up = np.array([[0, 0], [1, 0]], dtype=complex)
    V = np.kron(up, up.T) + np.kron(up.T, up)
    return RegularKickSpec(H_S=H_Q, H_U=H_Q, rho_U=np.diag([1 - p, p]), V_tilde=V, beta_units=math.log((1 - p) / p))


def test_regular_generator_two_routes_agree():
    spec = _exchange_regular()
    L = regular_kick_generator(spec, hamiltonian=False)
    assert np.allclose(L, double_commutator_generator(spec))


def test_regular_generator_thermalises_to_unit_state():
    spec = _exchange_regular(0.3)
    L = regular_kick_generator(spec)
    assert np.max(np.abs(L @ vec(np.diag([0.7, 0.3])))) < 1e-14


def test_collision_step_approaches_generator():
    spec = _exchange_regular()
    L = regular_kick_generator(spec)
    rho = sample_state(12, 2)
    dt = 1e-4
    one = unvec(collision_step(spec, dt) @ vec(rho))
    assert np.allclose((one - rho) / dt, unvec(L @ vec(rho)), atol=1e-2)


def test_regular_rates_for_thermal_units():
    spec = _exchange_regular(0.3)
    r = regular_kick_rates(spec, np.diag([0.2, 0.8]))
    assert r.ledger.first_law_residual == pytest.approx(0.0, abs=1e-12)
    assert r.mixing >= 0
    assert r.Sigma_comparison - r.ledger.Sigma_S == pytest.approx(r.mixing, abs=1e-10)
    assert r.divergent_coefficient == 0.0


def test_uncentred_coupling_rejected():
    with pytest.raises(CenteringError):
        RegularKickSpec(H_S=H_Q, H_U=H_Q, rho_U=np.diag([0.7, 0.3]), V_tilde=np.kron(sigma_z(), sigma_z()))


def test_drive_mimic_tracks_the_drive():
    spec = DriveMimicSpec(H_0=sigma_z() / 2, A=sigma_x(), f=lambda t: 0.8 * math.sin(1.3 * t),
                          df=lambda t: 0.8 * 1.3 * math.cos(1.3 * t), dt=0.02, horizon=1.0)
    r = drive_mimic(spec, np.diag([1.0, 0]))
    assert np.max(np.abs(r.unit_entropy_change)) < 1e-12
    assert r.trace_distance[-1] < 0.05
    assert np.max(np.abs(r.work_rate_mimic - r.work_rate_direct)) < 5 * spec.dt * r.scale


def test_drive_mimic_rejects_unreachable_drive():
    spec = DriveMimicSpec(H_0=sigma_z(), A=sigma_x(), f=lambda t: 2.0, dt=0.1, horizon=1.0)
    with pytest.raises(ValueError):
        drive_mimic(spec, np.diag([1.0, 0]))
