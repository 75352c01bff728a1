"""Stroboscopic steady states of a repeatedly applied system map."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..generators import unvec, vec
from ..operators import density_matrix, relative_entropy, trace_distance
from .interval import ReservoirMode, UnitStreamSpec, interval_superoperator


class ConvergenceError(RuntimeError):
    """Fixed-point iteration did not converge."""

    def __init__(self, msg, contraction_ratio):
        super().__init__(msg)
        self.contraction_ratio = contraction_ratio


@dataclass
class FixedPointResult:
    rho: np.ndarray
    iterations: int
    contraction_ratio: float
    contracting: bool
    monotone: bool
    relative_entropies: list = field(default_factory=list)


def _spectral_gap(M: np.ndarray) -> tuple[float, bool]:
    lam = np.sort(np.abs(np.linalg.eigvals(M)))[::-1]
    unit = np.sum(lam > 1 - 1e-9)
    second = lam[1] if lam.size > 1 else 0.0
    return float(second), bool(unit <= 1)


def stroboscopic_fixed_point(rho_S_init: np.ndarray, H_S=None, stream: UnitStreamSpec | None = None,
                             reservoir: ReservoirMode | None = None, *,
                             channel: np.ndarray | Callable | None = None,
                             tol: float = 1e-10, max_iter: int = 100_000,
                             monitor: int = 200) -> FixedPointResult:
    """Iterate the one-interval map until successive states agree.

    The map is given either as ``(H_S, stream, reservoir)`` or directly as
    ``channel``: a superoperator matrix or a linear callable on states.
    Convergence means trace distance below ``tol`` between successive
    iterates. The relative entropy to the limit is recorded for the first
    ``monitor`` iterates and checked for monotone decrease.

    Raises
    ------
    ConvergenceError
        After ``max_iter`` iterations without convergence.
    """
    rho = density_matrix(rho_S_init)
    d = rho.shape[0]
    if channel is None:
        if stream is None:
            raise ValueError("either channel or (H_S, stream) is required")
        channel = interval_superoperator(H_S, stream, reservoir, d)
    if callable(channel):
        step = channel
        ratio, contracting = float("nan"), True
    else:
        M = np.asarray(channel)
        step = lambda r: unvec(M @ vec(r), d)
        ratio, contracting = _spectral_gap(M)

    history = [rho]
    prev_dist = None
    emp_ratio = float("nan")
    for n in range(1, max_iter + 1):
        new = step(rho)
        new = 0.5 * (new + new.conj().T)
        new = new / np.trace(new).real
        dist = trace_distance(new, rho)
        if prev_dist and prev_dist > 0:
            emp_ratio = dist / prev_dist
        prev_dist = dist
        rho = new
        if len(history) < monitor:
            history.append(rho)
        if dist < tol:
            break
    else:
        raise ConvergenceError(f"no convergence after {max_iter} iterations (last step {dist:.2e})",
                               emp_ratio if np.isnan(ratio) else ratio)
    if np.isnan(ratio):
        ratio = emp_ratio
    rel = [relative_entropy(h, rho) for h in history]
    finite = [r for r in rel if np.isfinite(r)]
    monotone = all(b <= a + 1e-12 for a, b in zip(finite, finite[1:]))
    return FixedPointResult(rho=rho, iterations=n, contraction_ratio=ratio, contracting=contracting,
                            monotone=monotone, relative_entropies=rel)
