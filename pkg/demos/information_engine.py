"""A three-state engine writing on a tape of bits.

Bits arrive with bias delta. The engine lifts a mass when it converts 0s
into 1s, paying with tape entropy. We print the steady balance for a few
parameter points and the phase of each (engine or eraser).
"""

from repint.models import MandalJarzynskiSpec, mj_run

print(f"{'eps':>5s} {'delta':>6s} {'W_sw':>10s} {'beta Q':>10s} {'dS_U':>10s}  regime")
for eps, delta in [(0.5, 0.8), (0.2, 0.9), (0.2, -0.2), (-0.3, 0.0), (0.9, 0.3)]:
    r = mj_run(MandalJarzynskiSpec(eps, delta, tau=10.0))
    regime = "engine (work from tape)" if r.W_sw < 0 and r.dS_U > 0 else (
        "eraser (work into tape)" if r.dS_U < 0 else "dud")
    print(f"{eps:5.2f} {delta:6.2f} {r.W_sw:10.5f} {r.ledger.beta * r.Q:10.5f} {r.dS_U:10.5f}  {regime}")
    assert r.ledger.beta * r.Q <= r.dS_U + 1e-9
