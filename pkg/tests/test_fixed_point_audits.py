import math

import numpy as np
import pytest

from repint.generators import ThermalBathSpec
from repint.operators import gibbs_state, sample_state, sigma_x
from repint.repeated_interaction import (ConvergenceError, ReservoirClass, UnitStreamSpec, WeakReservoir,
                                         classical_floor_check, classify_stream, interval_superoperator,
                                         kelvin_planck_cycle, landauer_audit, run_interval,
                                         stroboscopic_fixed_point, swap_resetter)

UP = np.array([[0, 0], [1, 0]], dtype=complex)
EXCHANGE = np.kron(UP, UP.T) + np.kron(UP.T, UP)
H_Q = np.diag([0, 1.0]).astype(complex)


def test_thermal_units_thermalise_the_system():
    # resonant exchange with units at beta' and no bath: the fixed point is the unit state
    bp = 0.7
    stream = UnitStreamSpec(H_U=H_Q, rho_U=gibbs_state(H_Q, bp), tau=1.0, V_SU=0.8 * EXCHANGE)
    fp = stroboscopic_fixed_point(np.diag([1.0, 0]), H_Q, stream, tol=1e-13)
    assert np.allclose(fp.rho, gibbs_state(H_Q, bp), atol=1e-12)
    assert fp.monotone
    assert fp.contracting and fp.contraction_ratio < 1


def test_fixed_point_matches_superoperator_null_space():
    bath = ThermalBathSpec(1.0, (sigma_x(),), gamma0=0.3)
    stream = UnitStreamSpec(H_U=2 * H_Q, rho_U=np.diag([0.2, 0.8]), tau=2.0, tau_prime=0.8,
                            V_SU=0.6 * EXCHANGE)
    M = interval_superoperator(H_Q, stream, WeakReservoir(bath), 2)
    w, v = np.linalg.eig(M)
    ref = v[:, np.argmin(np.abs(w - 1))].reshape(2, 2, order="F")
    ref /= np.trace(ref)
    fp = stroboscopic_fixed_point(np.eye(2) / 2, channel=M, tol=1e-14)
    assert np.allclose(fp.rho, ref, atol=1e-12)


def test_non_contracting_map_raises():
    flip = np.zeros((4, 4))
    flip[0, 3] = flip[3, 0] = 1.0        # swaps populations forever
    with pytest.raises(ConvergenceError):
        stroboscopic_fixed_point(np.diag([0.9, 0.1]), channel=flip, max_iter=50)


def test_classify_heat_work_information():
    bp = 0.5
    stream = UnitStreamSpec(H_U=H_Q, rho_U=gibbs_state(H_Q, bp), tau=1.0, V_SU=0.02 * EXCHANGE)
    st, led = run_interval(np.diag([0.3, 0.7]), H_Q, stream)
    assert classify_stream(led, st.rho_U, stream, bp).reservoir_class is ReservoirClass.IDEAL_HEAT
    # pure excited units fully swapped: energy moves, entropy does not
    s2 = UnitStreamSpec(H_U=H_Q, rho_U=np.diag([0, 1.0]), tau=1.0, V_SU=(math.pi / 2) * EXCHANGE)
    st, led = run_interval(np.diag([1.0, 0]), H_Q, s2)
    assert classify_stream(led, st.rho_U, s2).reservoir_class is ReservoirClass.IDEAL_WORK
    # degenerate units only exchange entropy
    s3 = UnitStreamSpec(H_U=np.zeros((2, 2)), rho_U=np.diag([1.0, 0]), tau=1.0,
                        V_SU=(math.pi / 2) * EXCHANGE)
    st, led = run_interval(np.eye(2) / 2, np.zeros((2, 2)), s3)
    assert classify_stream(led, st.rho_U, s3).reservoir_class is ReservoirClass.IDEAL_INFORMATION


def test_landauer_bound_at_steady_state():
    bath = ThermalBathSpec(1.0, (sigma_x(),))
    stream = UnitStreamSpec(H_U=H_Q, rho_U=np.diag([0.95, 0.05]), tau=2.0, tau_prime=0.9,
                            V_SU=0.7 * EXCHANGE)
    res = WeakReservoir(bath, during_interaction=False)
    fp = stroboscopic_fixed_point(np.eye(2) / 2, H_Q, stream, res, tol=1e-13)
    _, led = run_interval(fp.rho, H_Q, stream, res)
    rep = landauer_audit(led)
    assert rep.steady and rep.holds
    assert rep.slack_energy == pytest.approx(rep.T_Sigma_S, abs=1e-9)


def test_classical_floor():
    H = np.diag([0, 1.0, 3.0]).astype(complex)
    for s in range(50):
        r = classical_floor_check(sample_state(s, 3), H, 0.7)
        assert r["gap"] >= -1e-12
        assert r["gap"] == pytest.approx(0.7 * r["entropy_gain"], abs=1e-12)


def test_kelvin_planck_cycle_closes():
    stream = UnitStreamSpec(H_U=np.diag([0, 2.0]).astype(complex), rho_U=np.diag([0.2, 0.8]), tau=2.0,
                            tau_prime=0.6, V_SU=EXCHANGE)
    res = WeakReservoir(ThermalBathSpec(1.0, (sigma_x(),)), during_interaction=False)
    H_r, rs, rr, r0 = swap_resetter(stream, 1.0)
    rep = kelvin_planck_cycle(H_Q, stream, res, H_r, rs, rr, np.eye(2) / 2, r0)
    assert rep.W < 0
    assert rep.W + rep.W_reset >= -1e-9
    assert rep.slack >= -1e-9
    assert rep.reset_error < 1e-6
