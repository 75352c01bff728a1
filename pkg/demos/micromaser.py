"""Excited atoms pumping a leaky cavity.

Each atom spends a pi/2-tuned time in the cavity. When the incoming atoms are
hotter than the cavity's thermal population, the photon number climbs above
the thermal value; below that threshold the atoms absorb.
"""

import math

from repint.models import MaserSpec, maser_run

spec0 = MaserSpec()
threshold = 1 / (1 + math.exp(spec0.beta * spec0.Delta))
print(f"thermal photon number {spec0.thermal_mean:.4f}; pumping threshold p > {threshold:.4f}")
for p in (0.1, 0.5, 0.9, 1.0):
    r = maser_run(MaserSpec(p_excited=p, kappa=0.5), n_intervals=400, tol=1e-10)
    print(f"p_excited {p:.1f}: steady n = {r.photon_numbers[-1]:.5f}, "
          f"pumped {r.pumped_above_thermal}, units act as {r.classification.reservoir_class.name}")
