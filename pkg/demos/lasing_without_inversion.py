"""Three-level atoms with a coherence between their lower levels pumping a cavity.

Without coherence the cavity thermalizes to the atoms' effective temperature.
A negative coherence suppresses absorption so the cavity gains photons even
though the upper level is less populated than the lower ones.
"""

import numpy as np

from repint.models import LasingThresholdError, LWISpec, lwi_photon_number, lwi_steady_number

print("thermal atoms, beta Omega = 1:", lwi_steady_number(LWISpec.thermal(1.0)), "vs", 1 / (np.e - 1))
for rho_bc in (0.0, -0.05, -0.1, -0.2):
    spec = LWISpec(P_a=0.15, P_b=0.425, P_c=0.425, rho_bc=rho_bc)
    try:
        n = lwi_steady_number(spec)
        ns, _ = lwi_photon_number(spec, [0.5, 2.0, 8.0])
        print(f"rho_bc={rho_bc:+.2f}: steady n = {n:.6f}; n(t) from empty = {np.round(ns, 4)}")
    except LasingThresholdError as exc:
        print(f"rho_bc={rho_bc:+.2f}: above threshold ({exc})")
