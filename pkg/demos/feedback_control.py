"""Measure a qubit with a noisy unit, then act on the outcome.

The memory unit copies the qubit's level with flip probability eps. If it
reads "ground", the excited level is raised; if it reads "excited", that
level is lowered to zero and the energy is collected. A bath then relaxes
the qubit before the levels are restored. Once the cycle repeats itself, the
extracted work never exceeds T times the measured mutual information, and it
turns into a cost as the readout gets noisier.
"""

import numpy as np

from repint.repeated_interaction import (feedback_protocol, feedback_superoperator, noisy_readout_feedback,
                                         stroboscopic_fixed_point)

H_S = np.diag([0.0, 1.0]).astype(complex)
per_outcome = [np.diag([0.0, 3.0]), np.diag([1.0, 0.0])]
for eps in (0.0, 0.1, 0.3, 0.5):
    spec = noisy_readout_feedback(H_S, per_outcome, eps, beta=1.0, tau=2.0)
    fp = stroboscopic_fixed_point(np.eye(2) / 2, channel=feedback_superoperator(spec), tol=1e-13)
    rep = feedback_protocol(fp.rho, spec)
    print(f"readout error {eps:.1f}: -beta W_fb = {-rep.beta * rep.feedback.W:8.5f}, "
          f"I_ms = {rep.I_ms:8.5f}, slack {rep.information_bound_slack:.3f}")
