import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from repint.models import (DemonSpec, LasingThresholdError, LindbladViolationError, LWISpec,
                           MandalJarzynskiSpec, MaserSpec, TruncationLeakError, demon_effective_generator,
                           demon_sweep, demon_thermo, information_rate, information_rate_factored,
                           information_rate_reduced, lwi_closed_form_generator, lwi_generator, lwi_photon_number,
                           lwi_steady_number, maser_run, mj_rate_matrix, mj_run, mj_stationary_direct, steady_populations,
                           write_sweep_csv)
from repint.repeated_interaction import ReservoirClass

DATA = Path(__file__).parent / "data"


# --- bit-tape engine ------------------------------------------------------------

def test_mj_matches_standalone_golden():
    g = json.loads((DATA / "mj_golden.json").read_text())
    r = mj_run(MandalJarzynskiSpec(g["eps_bias"], g["delta_in"], g["tau"], g["beta"]))
    assert np.allclose(r.p_S, g["p_S"], atol=1e-13, rtol=0)
    assert r.p_U_out[1] == pytest.approx(g["p1_out"], abs=1e-13)
    assert r.W_sw == pytest.approx(g["W_sw"], abs=1e-13)
    assert r.Q == pytest.approx(g["Q"], abs=1e-13)
    assert r.dS_U == pytest.approx(g["dS_U"], abs=1e-13)
    assert r.classification.reservoir_class is ReservoirClass.IDEAL_INFORMATION


def test_mj_direct_null_space_agrees():
    spec = MandalJarzynskiSpec(-0.3, 0.4, 2.0)
    assert np.allclose(mj_run(spec).p_S, mj_stationary_direct(spec), atol=1e-13)


def test_mj_unbiased_engine_does_no_work():
    r = mj_run(MandalJarzynskiSpec(0.0, 0.6, 3.0))
    assert r.W_sw == 0.0 and r.Q == 0.0
    # at zero bias the rate matrix is doubly stochastic: its stationary vector is uniform
    R = mj_rate_matrix(0.0)
    assert np.allclose(R @ np.full(6, 1 / 6), 0, atol=1e-15)
    assert np.allclose(mj_run(MandalJarzynskiSpec(0.0, 0.0, 3.0)).p_S, 1 / 3, atol=1e-14)


def test_mj_rejects_bad_bias():
    with pytest.raises(ValueError):
        MandalJarzynskiSpec(1.0, 0.0, 1.0)


# --- maser ----------------------------------------------------------------------

def test_maser_matches_standalone_golden():
    gold = json.loads((DATA / "maser_golden.json").read_text())
    for g in gold:
        r = maser_run(MaserSpec(p_excited=g["p_excited"], kappa=g["kappa"], N_max=g["N_max"]),
                      n_intervals=400, tol=1e-13)
        assert r.converged
        assert r.photon_numbers[-1] == pytest.approx(g["n_mean"], abs=1e-9)
        assert r.pumped_above_thermal


def test_maser_without_coupling_stays_thermal():
    r = maser_run(MaserSpec(g=0.0, kappa=0.5), n_intervals=5)
    assert np.allclose(r.photon_numbers, 1 / (math.e - 1), atol=1e-10)


def test_maser_thermal_atoms_leave_cavity_thermal():
    r = maser_run(MaserSpec(p_excited=1 / (1 + math.e), kappa=0.5), n_intervals=10)
    assert np.allclose(r.photon_numbers, r.thermal_mean, atol=1e-10)
    assert not r.pumped_above_thermal


def test_maser_excited_atoms_in_cold_cavity_act_as_work():
    r = maser_run(MaserSpec(p_excited=1.0, beta=10.0, kappa=2.0, tau_free=10.0), n_intervals=20)
    assert r.classification.reservoir_class is ReservoirClass.IDEAL_WORK
    assert all(abs(l.first_law_residual) < 1e-10 for l in r.ledgers)


def test_maser_truncation_leak_detected():
    with pytest.raises(TruncationLeakError):
        maser_run(MaserSpec(p_excited=0.9, kappa=0.05, N_max=30), n_intervals=300)


# --- coherence-pumped cavity ------------------------------------------------------

def test_lwi_thermal_atoms_give_bose_occupation():
    spec = LWISpec.thermal(1.0)
    assert lwi_steady_number(spec) == pytest.approx(1 / (math.e - 1), abs=1e-6)


def test_lwi_generator_routes_agree_and_solution_relaxes():
    spec = LWISpec(0.15, 0.425, 0.425, -0.1, N_max=20)
    assert np.allclose(lwi_generator(spec), lwi_closed_form_generator(spec))
    N, N_eff = lwi_photon_number(spec, [0.0, 1e3])
    assert N[0] == 0.0 and N[-1] == pytest.approx(N_eff)
    # oracle: mean photon number from the truncated generator itself
    d = spec.N_max + 1
    rho0 = np.zeros((d, d))
    rho0[0, 0] = 1
    rho = (expm(lwi_generator(spec) * 2.0) @ rho0.reshape(-1, order="F")).reshape(d, d, order="F")
    assert np.real(np.trace(np.diag(np.arange(d)) @ rho)) == pytest.approx(lwi_photon_number(spec, [2.0])[0][0],
                                                                        abs=1e-6)


def test_lwi_threshold_and_positivity():
    with pytest.raises(LasingThresholdError):
        lwi_photon_number(LWISpec(0.3, 0.35, 0.35, -0.2), [1.0])
    with pytest.raises(LindbladViolationError):
        LWISpec(0.2, 0.4, 0.4, -0.5)


# --- feedback demon -----------------------------------------------------------------

def _finite_step_information(spec, dt):
    """Mutual information consumed in one short feedback step, divided by dt (standalone)."""
    H = lambda p: -sum(x * math.log(x) for x in np.ravel(p) if x > 0)
    MI = lambda pj: H(pj.sum(1)) + H(pj.sum(0)) - H(pj)
    p_E, p_F = steady_populations(spec)
    e = spec.eps_ms
    pj = np.array([[(1 - e) * p_E, e * p_E], [e * p_F, (1 - e) * p_F]])   # rows dot E/F, cols bit
    out = np.zeros((2, 2))
    for bit in (0, 1):
        G = np.zeros((2, 2))
        for lead in ("L", "R"):
            f, g = spec.fermi(lead), spec.bare_rate(lead, bit)
            G += [[-g * f, g * (1 - f)], [g * f, -g * (1 - f)]]
        out[:, bit] = expm(G * dt) @ pj[:, bit]
    return (MI(pj) - MI(out)) / dt


def test_demon_information_rate_against_finite_step_oracle():
    spec = DemonSpec.symmetric(1.0, 0.05)
    oracle = _finite_step_information(spec, 1e-6)
    assert information_rate(spec) == pytest.approx(oracle, rel=1e-5)
    assert information_rate(spec) == pytest.approx(information_rate_reduced(spec), abs=1e-12)
    # the factored expression disagrees away from eps = 1/2
    assert abs(information_rate_factored(spec) - information_rate(spec)) > 1e-3


def test_demon_generator_routes_agree():
    spec = DemonSpec.symmetric(3.0, 0.2)
    G = demon_effective_generator(spec)
    assert np.allclose(G.sum(axis=0), 0)
    p = np.array(steady_populations(spec))
    assert np.allclose(G @ p, 0, atol=1e-14)


def test_demon_random_readout_has_no_information_or_extraction():
    pts = demon_sweep(DemonSpec(0.5), V_grid=np.linspace(0, 60, 31), eps_grid=[0.5])
    assert all(abs(p.info_rate) < 1e-12 for p in pts)
    assert not any(p.extracts_work for p in pts)


def test_demon_sweep_second_law_and_csv():
    pts = demon_sweep(DemonSpec(0.1), V_grid=np.linspace(0, 60, 31), eps_grid=[0.05, 0.1, 0.3])
    assert any(p.extracts_work for p in pts)
    assert all(p.sigma_total >= p.sigma_eff - 1e-9 and p.sigma_eff >= -1e-9 for p in pts)
    text = write_sweep_csv(pts[:2])
    assert text.splitlines()[0] == "V,eps,I_L,info_rate,sigma_total,sigma_eff,chem_work_rate"


def test_demon_perfect_readout_is_infinite_information():
    assert information_rate(DemonSpec(0.0)) == math.inf
    assert demon_thermo(DemonSpec.symmetric(2.0, 0.3)).chem_work_rate < demon_thermo(DemonSpec.symmetric(2.0, 0.5)).chem_work_rate
