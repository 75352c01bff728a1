import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import logm

from repint.generators import ThermalBathSpec
from repint.operators import (gibbs_state, sample_hermitian, sample_state, sigma_x, sigma_z,
                              von_neumann_entropy)
from repint.repeated_interaction import (FiniteReservoir, NoReservoir, ResourceLimitError, ThermoLedger,
                                         UnitStreamSpec, WeakReservoir, interval_superoperator, run_interval,
                                         write_ledger_csv)

UP = np.array([[0, 0], [1, 0]], dtype=complex)       # |1><0|
EXCHANGE = np.kron(UP, UP.T) + np.kron(UP.T, UP)


def _exchange_stream(g, tau_prime, tau, p_unit, omega=1.0):
    return UnitStreamSpec(H_U=np.diag([0, omega]).astype(complex), rho_U=np.diag([1 - p_unit, p_unit]),
                          tau=tau, tau_prime=tau_prime, V_SU=g * EXCHANGE)


def test_full_swap_hands_over_the_unit_state():
    g = 0.7
    stream = _exchange_stream(g, math.pi / (2 * g), 3.0, 0.2)
    rho_S = np.diag([0.1, 0.9]).astype(complex)
    state, led = run_interval(rho_S, np.diag([0, 1.0]).astype(complex), stream)
    assert np.allclose(state.rho_S, np.diag([0.8, 0.2]), atol=1e-12)
    assert np.allclose(state.rho_U, rho_S, atol=1e-12)
    assert led.W == pytest.approx(0.0, abs=1e-12)
    assert led.dE_S == pytest.approx(-0.7, abs=1e-12)
    assert led.first_law_residual == pytest.approx(0.0, abs=1e-12)
    assert led.I_SU == pytest.approx(0.0, abs=1e-10)


def test_closed_system_work_equals_energy_change():
    H = lambda t: sigma_z() / 2 + 0.4 * math.sin(1.7 * t) * sigma_x()
    stream = UnitStreamSpec(H_U=np.zeros((1, 1)), rho_U=np.eye(1), tau=2.0, dt_max=1e-3)
    rho0 = sample_state(1, 2)
    state, led = run_interval(rho0, H, stream)
    f = lambda t, y: (-1j * (H(t) @ y.reshape(2, 2) - y.reshape(2, 2) @ H(t))).ravel()
    ref = solve_ivp(f, (0, 2), rho0.ravel(), rtol=1e-11, atol=1e-13).y[:, -1].reshape(2, 2)
    assert np.allclose(state.rho_S, ref, atol=1e-9)
    E_ref = np.real(np.trace(H(2.0) @ ref) - np.trace(H(0.0) @ rho0))
    assert led.W_X == pytest.approx(E_ref, abs=1e-9)
    assert led.dE_S == pytest.approx(E_ref, abs=1e-9)


def test_finite_reservoir_entropy_production_decomposes():
    H_R, H_XR = sample_hermitian(2, 2), sample_hermitian(3, 4)
    beta = 0.6
    stream = UnitStreamSpec(H_U=np.zeros((1, 1)), rho_U=np.eye(1), tau=1.5)
    rho0 = sample_state(4, 2)
    state, led = run_interval(rho0, sample_hermitian(5, 2), stream, FiniteReservoir(H_R, H_XR, beta))
    # oracle with scipy logm
    g = gibbs_state(H_R, beta)
    D = np.real(np.trace(state.rho_R @ (logm(state.rho_R) - logm(g))))
    I = (von_neumann_entropy(state.rho_S) + von_neumann_entropy(state.rho_R)
         - von_neumann_entropy(state.rho_SR))
    assert led.Sigma == pytest.approx(D + I, abs=1e-10)
    assert led.first_law_residual == pytest.approx(0.0, abs=1e-10)


def test_unitary_interval_without_reservoir_has_zero_sigma():
    stream = _exchange_stream(0.5, 1.0, 1.0, 0.3)
    _, led = run_interval(np.diag([0.6, 0.4]), np.diag([0, 1.0]).astype(complex), stream, NoReservoir())
    assert math.isnan(led.beta)
    assert led.Sigma == pytest.approx(0.0, abs=1e-12)
    assert led.Sigma_S >= led.I_SU - 1e-12 and led.I_SU > 0
    assert led.Sigma_S == pytest.approx(led.Sigma + led.I_SU)


def test_local_bath_segment_matches_generic_segment():
    bath = ThermalBathSpec(0.8, (sigma_x(),), gamma0=0.6)
    stream = _exchange_stream(0.9, 0.7, 2.0, 0.4, omega=1.3)
    H = np.diag([0, 1.0]).astype(complex)
    res = WeakReservoir(bath, during_interaction=False)
    rho0 = sample_state(6, 2)
    s1, l1 = run_interval(rho0, H, stream, res)
    s2, l2 = run_interval(rho0, lambda t: H, stream, res)    # callable forces the generic path
    assert np.allclose(s1.rho_SU, s2.rho_SU, atol=1e-9)
    assert l1.Q == pytest.approx(l2.Q, abs=1e-9)


def test_weak_bath_heat_and_first_law():
    bath = ThermalBathSpec(1.0, (sigma_x(),))
    stream = _exchange_stream(0.5, 1.0, 2.0, 0.8)
    _, led = run_interval(np.eye(2) / 2, np.diag([0, 1.0]).astype(complex), stream, WeakReservoir(bath))
    assert led.first_law_residual == pytest.approx(0.0, abs=1e-10)
    assert led.Sigma >= -1e-12


def test_superoperator_reproduces_run_interval():
    bath = ThermalBathSpec(1.0, (sigma_x(),))
    stream = _exchange_stream(0.5, 1.0, 2.0, 0.8)
    H = np.diag([0, 1.0]).astype(complex)
    M = interval_superoperator(H, stream, WeakReservoir(bath), 2)
    rho = sample_state(7, 2)
    out, _ = run_interval(rho, H, stream, WeakReservoir(bath))
    assert np.allclose((M @ rho.reshape(-1, order="F")).reshape(2, 2, order="F"), out.rho_S, atol=1e-12)


def test_kick_energy_is_switching_work():
    swap = np.eye(4)[[0, 2, 1, 3]]
    stream = UnitStreamSpec(H_U=np.diag([0, 2.0]).astype(complex), rho_U=np.diag([0, 1.0]), tau=1.0,
                            kick=swap)
    _, led = run_interval(np.diag([1.0, 0]), np.diag([0, 1.0]).astype(complex), stream)
    assert led.W_sw == pytest.approx(-1.0)     # excitation moved from a 2.0 level to a 1.0 level
    assert led.first_law_residual == pytest.approx(0.0, abs=1e-14)


def test_input_validation():
    with pytest.raises(ValueError):
        UnitStreamSpec(H_U=np.eye(2), rho_U=np.eye(2) / 2, tau=1.0, tau_prime=2.0)
    with pytest.raises(ValueError):
        UnitStreamSpec(H_U=np.eye(2), rho_U=np.eye(2) / 2, tau=1.0, kick=2 * np.eye(4))
    with pytest.raises(ResourceLimitError):
        stream = UnitStreamSpec(H_U=np.eye(4), rho_U=np.eye(4) / 4, tau=1.0)
        run_interval(np.eye(4) / 4, np.eye(4), stream, FiniteReservoir(np.eye(16), np.zeros((64, 64)), 1.0))


def test_ledger_csv_round_trip():
    stream = _exchange_stream(0.5, 1.0, 1.0, 0.3)
    _, led = run_interval(np.eye(2) / 2, np.diag([0, 1.0]).astype(complex), stream)
    text = write_ledger_csv([led, led])
    lines = text.strip().split("\n")
    assert lines[0].split(",") == ["interval"] + ThermoLedger.header()
    assert [float(x) for x in lines[1].split(",")[1:]] == pytest.approx(led.row(), nan_ok=True)
