"""Reproducing a classical time-dependent drive with a stream of prepared units."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..operators import (dagger, density_matrix, expectation, partial_trace, sigma_z,
                         trace_distance, unitary_from, von_neumann_entropy)
from ..repeated_interaction._engine import Segment


@dataclass(frozen=True)
class DriveMimicSpec:
    """Drive ``H_0 + f(t) A`` mimicked by units with ``F = F_scale sigma_z``.

    Unit ``n`` is prepared diagonal with ``<F> = f(n dt)``, so ``F_scale``
    must bound ``|f|``.
    """

    H_0: np.ndarray
    A: np.ndarray
    f: Callable[[float], float]
    dt: float
    horizon: float
    F_scale: float = 1.0
    df: Callable[[float], float] | None = None

    @property
    def steps(self) -> int:
        n = int(round(self.horizon / self.dt))
        if not np.isclose(n * self.dt, self.horizon, rtol=1e-9):
            raise ValueError("horizon must be a whole number of steps")
        return n

    def unit_state(self, t: float) -> np.ndarray:
        p = 0.5 * (1 + self.f(t) / self.F_scale)
        if not -1e-12 <= p <= 1 + 1e-12:
            raise ValueError(f"|f({t})| exceeds F_scale={self.F_scale}")
        return np.diag([p, 1 - p]).astype(complex)

    def fprime(self, t: float) -> float:
        if self.df is not None:
            return self.df(t)
        h = 1e-6 * max(1.0, abs(t))
        return (self.f(t + h) - self.f(t - h)) / (2 * h)


@dataclass
class DriveMimicResult:
    times: np.ndarray
    rho_mimic: list
    rho_direct: list
    trace_distance: np.ndarray
    work_rate_mimic: np.ndarray
    work_rate_forward: np.ndarray
    work_rate_direct: np.ndarray
    unit_entropy_change: np.ndarray
    scale: float


def drive_mimic(spec: DriveMimicSpec, rho_S0: np.ndarray, dt_direct: float = 1e-3) -> DriveMimicResult:
    """Run the unit stream and the explicit drive side by side.

    The mimic work rate at step ``n`` is the switching work of pairing the
    incoming unit ``n+1`` with the outgoing unit ``n``, minus the unit energy
    change, divided by ``dt``. ``work_rate_forward`` is
    ``(f((n+1)dt) - f(n dt)) / dt * <A>``; ``work_rate_direct`` is
    ``f'(t) <A>`` along the explicit drive.
    """
    rho = density_matrix(rho_S0)
    d = rho.shape[0]
    F = spec.F_scale * sigma_z()
    H_U = np.zeros((2, 2), dtype=complex)
    AF = np.kron(spec.A, F)
    dt, n = spec.dt, spec.steps
    times = dt * np.arange(n + 1)

    mimic = [rho]
    w_mimic, w_fwd, dS_U = [], [], []
    rho_U = spec.unit_state(0.0)
    for k in range(n):
        # the drive enters only through the unit preparation
        U = unitary_from(np.kron(spec.H_0, np.eye(2)) + AF, dt)
        joint = U @ np.kron(rho, rho_U) @ dagger(U)
        rho_next = partial_trace(joint, (d, 2), 0)
        out_U = partial_trace(joint, (d, 2), 1)
        next_U = spec.unit_state(times[k + 1])
        W_sw = expectation(AF, np.kron(rho_next, next_U)) - expectation(AF, joint)
        dE_U = expectation(H_U, out_U - rho_U)
        w_mimic.append((W_sw - dE_U) / dt)
        w_fwd.append((spec.f(times[k + 1]) - spec.f(times[k])) / dt * expectation(spec.A, rho_next))
        dS_U.append(von_neumann_entropy(out_U) - von_neumann_entropy(rho_U))
        rho, rho_U = rho_next, next_U
        mimic.append(rho)

    H_t = lambda t: spec.H_0 + spec.f(t) * spec.A
    direct = [density_matrix(rho_S0)]
    w_direct = []
    for k in range(n):
        seg = Segment(H_t, times[k], times[k + 1], dt_max=min(dt_direct, dt))
        direct.append(seg.apply(direct[-1]))
        w_direct.append(spec.fprime(times[k + 1]) * expectation(spec.A, direct[-1]))

    fp = np.array([abs(spec.fprime(t)) for t in times])
    h = max(dt, 1e-3)
    fpp = np.array([abs(spec.fprime(t + h) - spec.fprime(t - h)) / (2 * h) for t in times])
    normA = np.linalg.norm(spec.A, 2)
    comm = np.linalg.norm(spec.H_0 @ spec.A - spec.A @ spec.H_0, 2)
    scale = normA * (fp.max() + fpp.max()) + fp.max() * comm + fp.max() * normA * spec.F_scale
    return DriveMimicResult(
        times=times, rho_mimic=mimic, rho_direct=direct,
        trace_distance=np.array([trace_distance(a, b) for a, b in zip(mimic, direct)]),
        work_rate_mimic=np.array(w_mimic), work_rate_forward=np.array(w_fwd),
        work_rate_direct=np.array(w_direct), unit_entropy_change=np.array(dS_U), scale=float(scale),
    )
