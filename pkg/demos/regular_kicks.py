"""Frequent weak collisions and the master equation they converge to.

When units arrive every dt with coupling scaled by 1/sqrt(dt), the collision
map approaches a Lindblad generator. The leading error shrinks like sqrt(dt)
when the coupling has a non-zero third moment in the unit state.
"""

import numpy as np
from scipy.linalg import expm

from repint.effective_me import RegularKickSpec, collision_step, regular_kick_generator
from repint.generators import unvec, vec
from repint.operators import sample_state, trace_distance

rng = np.random.default_rng(2)


def hermitian(d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


H_S = hermitian(2)
B = np.diag([1, 1, -2]).astype(complex) + 0.5 * (np.diag([1, 1], 1) + np.diag([1, 1], -1))
B -= np.trace(B) / 3 * np.eye(3)
spec = RegularKickSpec(H_S=H_S, H_U=np.diag([0, 0.3, 0.7]).astype(complex),
                       rho_U=np.eye(3) / 3, V_tilde=np.kron(hermitian(2), B))
rho0 = sample_state(5, 2)
exact = unvec(expm(regular_kick_generator(spec)) @ vec(rho0))

prev = None
for k in range(5, 12):
    n = 2 ** k
    err = trace_distance(unvec(np.linalg.matrix_power(collision_step(spec, 1 / n), n) @ vec(rho0)), exact)
    ratio = f"  ratio {prev / err:.3f}" if prev else ""
    print(f"dt = 1/{n:<5d} error {err:.3e}{ratio}")
    prev = err
print(f"\nratios drift towards sqrt(2) = {np.sqrt(2):.3f} as higher-order terms die out")
