"""Monte Carlo unravelling of Poisson kicks into individual kick histories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .poisson import PoissonKickSpec, background_generator, jump_superoperators
from ..generators import unvec, vec
from ..operators import density_matrix


@dataclass
class TrajectoryResult:
    times: np.ndarray
    mean: np.ndarray      # (n_times, d, d)
    stderr: np.ndarray    # (n_times, d, d), real
    n_traj: int


class _Flow:
    """``exp(L0 s)`` for arbitrary ``s`` via an eigendecomposition when well conditioned."""

    def __init__(self, L0):
        self.L0 = L0
        lam, V = np.linalg.eig(L0)
        if np.linalg.cond(V) < 1e8:
            self.lam, self.V, self.Vinv = lam, V, np.linalg.inv(V)
        else:
            self.lam = None

    def __call__(self, s, v):
        if s == 0:
            return v
        if self.lam is None:
            return expm(self.L0 * s) @ v
        return self.V @ (np.exp(self.lam * s) * (self.Vinv @ v))


def trajectory_sampler(spec: PoissonKickSpec, rho0: np.ndarray, times, n_traj: int,
                       seed: int) -> TrajectoryResult:
    """Average over ``n_traj`` kick histories, sampled on the grid ``times``.

    Between kicks each history evolves under the background generator; at
    each kick the reduced map ``J_S`` is applied. Trajectory ``i`` draws its
    kick times from a generator seeded with ``(seed, i)``, so results do not
    depend on how the work is split.
    """
    rho0 = density_matrix(rho0)
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("sample times must be non-negative and sorted")
    d = rho0.shape[0]
    flow = _Flow(background_generator(spec))
    J_S, _ = jump_superoperators(spec.U, spec.rho_U, spec.dims)
    v0 = vec(rho0).astype(complex)
    horizon = times[-1]

    n_t = times.size
    s1 = np.zeros((n_t, d * d), dtype=complex)
    s2_re = np.zeros((n_t, d * d))
    s2_im = np.zeros((n_t, d * d))
    for i in range(n_traj):
        rng = np.random.default_rng([seed, i])
        kicks = []
        t = 0.0
        while spec.gamma > 0:
            t += rng.exponential(1.0 / spec.gamma)
            if t > horizon:
                break
            kicks.append(t)
        v, now, k = v0, 0.0, 0
        for j, tj in enumerate(times):
            while k < len(kicks) and kicks[k] <= tj:
                v = J_S @ flow(kicks[k] - now, v)
                now = kicks[k]
                k += 1
            v = flow(tj - now, v)
            now = tj
            s1[j] += v
            s2_re[j] += v.real ** 2
            s2_im[j] += v.imag ** 2
    mean = s1 / n_traj
    var = (s2_re / n_traj - mean.real ** 2) + (s2_im / n_traj - mean.imag ** 2)
    err = np.sqrt(np.maximum(var, 0.0) / max(n_traj - 1, 1))
    return TrajectoryResult(
        times=times,
        mean=np.array([unvec(m, d) for m in mean]),
        stderr=np.array([unvec(e, d).real for e in err]),
        n_traj=n_traj,
    )
