import numpy as np
import pytest

from repint.operators import projector, sigma_x
from repint.repeated_interaction import (FeedbackHamiltonianError, FeedbackSpec, feedback_protocol,
                                         feedback_superoperator, noisy_readout_feedback,
                                         stroboscopic_fixed_point)

H_Q = np.diag([0, 1.0]).astype(complex)


def test_perfect_readout_information_is_system_entropy():
    spec = noisy_readout_feedback(H_Q, [np.zeros((2, 2)), np.zeros((2, 2))], 0.0, 1.0, 1.0)
    p = 0.3
    rep = feedback_protocol(np.diag([1 - p, p]), spec)
    assert rep.I_ms == pytest.approx(-(p * np.log(p) + (1 - p) * np.log(1 - p)), abs=1e-12)
    assert rep.measurement.dE_S == pytest.approx(0.0, abs=1e-14)
    assert rep.measurement.W == pytest.approx(0.0, abs=1e-14)


def test_useless_readout_carries_no_information():
    spec = noisy_readout_feedback(H_Q, [H_Q, -H_Q], 0.5, 1.0, 1.0)
    rep = feedback_protocol(np.diag([0.2, 0.8]), spec)
    assert rep.I_ms == pytest.approx(0.0, abs=1e-12)


def test_steady_state_bounds_hold():
    rng = np.random.default_rng(0)
    for _ in range(10):
        Hs = [np.diag(rng.normal(size=2)) for _ in range(2)]
        spec = noisy_readout_feedback(H_Q, Hs, rng.uniform(0.01, 0.4), 1.0, rng.uniform(0.3, 2.0))
        fp = stroboscopic_fixed_point(np.eye(2) / 2, channel=feedback_superoperator(spec), tol=1e-13)
        rep = feedback_protocol(fp.rho, spec)
        assert rep.information_bound_slack >= -1e-9
        assert rep.steady_bound_slack >= -1e-9
        assert rep.feedback_bound_slack >= -1e-9
        assert max(abs(r) for r in rep.first_law_residuals) < 1e-10


def test_block_structure_enforced():
    bad = np.kron(np.eye(2), sigma_x())         # flips the memory
    with pytest.raises(FeedbackHamiltonianError):
        FeedbackSpec(H_S=H_Q, rho_U=np.eye(2) / 2, tau=1.0, H_fb=bad, measurement=np.eye(4))
    ok = np.kron(H_Q, projector(2, 0)) + np.kron(-H_Q, projector(2, 1))
    spec = FeedbackSpec(H_S=H_Q, rho_U=np.eye(2) / 2, tau=1.0, H_fb=ok, measurement=np.eye(4))
    assert np.allclose(spec.feedback_hamiltonians[1], -H_Q)


def test_spec_validation():
    with pytest.raises(ValueError):
        FeedbackSpec(H_S=H_Q, rho_U=np.eye(2) / 2, tau=1.0, feedback_hamiltonians=[H_Q, H_Q])
    with pytest.raises(ValueError):
        noisy_readout_feedback(H_Q, [H_Q, H_Q], 1.5, 1.0, 1.0)
