"""Iterating one interval until the system repeats itself, then classifying the unit stream.

The fixed point of the interval map is the stroboscopic steady state. There
the system's own energy and entropy no longer change, so the units carry the
whole balance. The audit tells whether they act as a heat, work or
information reservoir and checks Landauer's bound.
"""

import numpy as np

from repint.generators import ThermalBathSpec
from repint.operators import sigma_x
from repint.repeated_interaction import (UnitStreamSpec, WeakReservoir, classify_stream, landauer_audit,
                                         run_interval, stroboscopic_fixed_point)

up = np.array([[0, 0], [1, 0]], dtype=complex)
H_S = np.diag([0.0, 1.0]).astype(complex)
stream = UnitStreamSpec(H_U=np.diag([0.0, 1.0]).astype(complex), rho_U=np.diag([0.9, 0.1]), tau=3.0,
                        tau_prime=1.0, V_SU=0.5 * (np.kron(up, up.T) + np.kron(up.T, up)))
reservoir = WeakReservoir(ThermalBathSpec(1.0, (sigma_x(),), gamma0=0.2), during_interaction=False)

fp = stroboscopic_fixed_point(np.eye(2) / 2, H_S, stream, reservoir, tol=1e-12)
print(f"converged in {fp.iterations} intervals, contraction ratio {fp.contraction_ratio:.4f}")
print("steady populations:", np.round(np.real(np.diag(fp.rho)), 6))

state, led = run_interval(fp.rho, H_S, stream, reservoir)
cls = classify_stream(led, state.rho_U, stream)
print(f"dE_S = {led.dE_S:.2e}, dS_S = {led.dS_S:.2e}")
print(f"units classified as {cls.reservoir_class.name} (dS_U/dE_U = {cls.entropy_energy_ratio:.4f})")
land = landauer_audit(led)
print(f"Landauer: beta(W - dE_U) = {land.bound_lhs:.5f} >= -dS_U = {land.bound_rhs:.5f}: {land.holds}")
