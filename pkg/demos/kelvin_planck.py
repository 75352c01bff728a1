"""No free lunch: work extracted from units is paid back when they are reset.

Inverted units drive a qubit in contact with one bath and deliver work.
Resetting the units against the same bath costs at least as much, so the
closed cycle extracts nothing. Dephasing in the energy basis can only lower
the free energy.
"""

import numpy as np

from repint.generators import ThermalBathSpec
from repint.operators import sample_state, sigma_x
from repint.repeated_interaction import (UnitStreamSpec, WeakReservoir, classical_floor_check,
                                         kelvin_planck_cycle, swap_resetter)

up = np.array([[0, 0], [1, 0]], dtype=complex)
H_S = np.diag([0.0, 1.0]).astype(complex)
stream = UnitStreamSpec(H_U=np.diag([0.0, 2.0]).astype(complex), rho_U=np.diag([0.2, 0.8]), tau=2.0,
                        tau_prime=0.7, V_SU=np.kron(up, up.T) + np.kron(up.T, up))
res = WeakReservoir(ThermalBathSpec(1.0, (sigma_x(),)), during_interaction=False)
H_r, r_stream, r_res, r0 = swap_resetter(stream, 1.0)
rep = kelvin_planck_cycle(H_S, stream, res, H_r, r_stream, r_res, np.eye(2) / 2, r0)
print(f"work per unit W = {rep.W:.5f}, reset cost W' = {rep.W_reset:.5f}, net {rep.W + rep.W_reset:.5f}")

rng = np.random.default_rng(0)
rho = sample_state(rng, 3)
chk = classical_floor_check(rho, np.diag([0.0, 0.7, 1.5]), 1.0)
print(f"free energy lost to dephasing a random qutrit: {chk['gap']:.5f}")
