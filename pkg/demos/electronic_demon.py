"""A quantum dot whose tunnelling rates are switched by a noisy readout.

Sweep the bias V for several readout errors. Where the chemical work rate
turns negative, the demon pushes electrons against the bias using the
information it gathers. A perfectly noisy readout (eps = 1/2) never does.
"""

import math

import numpy as np

from repint.models import DemonSpec, demon_sweep

pts = demon_sweep(DemonSpec(0.1, delta_fb=math.log(2), Gamma=1.0, beta=0.1),
                  V_grid=np.linspace(0, 60, 121), eps_grid=[0.05, 0.1, 0.25, 0.5])
for eps in (0.05, 0.1, 0.25, 0.5):
    region = [p.V for p in pts if p.eps == eps and p.extracts_work]
    span = f"V in [{min(region):.1f}, {max(region):.1f}]" if region else "none"
    info = max(p.info_rate for p in pts if p.eps == eps)
    print(f"eps={eps:.2f}: work extraction {span}; peak information rate {info:.4f}")
