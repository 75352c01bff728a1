"""Cavity pumped by a stream of two-level atoms, relaxing into a thermal bath between atoms."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..generators import ThermalBathSpec
from ..operators import destroy, expectation, gibbs_state
from ..repeated_interaction import (Classification, UnitStreamSpec, WeakReservoir,
                                    classify_stream, run_interval)

LEAK_TOL = 1e-6


class TruncationLeakError(RuntimeError):
    """Population reached the top Fock level."""


@dataclass(frozen=True)
class MaserSpec:
    """Cavity ``Omega a^dag a`` and atoms ``(Delta/2)(|1><1| - |0><0|)`` coupled resonantly.

    Without ``tau_prime`` the interaction time is re-tuned every interval so
    that an excited atom fully emits into the current mean photon number:
    ``g tau' sqrt(n + 1) = pi/2``. ``tau_free`` is the bath-only relaxation
    time between atoms.
    """

    Omega: float = 1.0
    Delta: float = 1.0
    g: float = 1.0
    p_excited: float = 0.9
    beta: float = 1.0
    kappa: float = 0.05
    tau_free: float = 1.0
    tau_prime: float | None = None
    N_max: int = 30

    def __post_init__(self):
        if self.N_max < 2:
            raise ValueError("N_max must be at least 2")
        if not 0 <= self.p_excited <= 1:
            raise ValueError("p_excited must lie in [0, 1]")
        if self.kappa < 0 or self.tau_free < 0:
            raise ValueError("kappa and tau_free must be non-negative")

    @property
    def a(self) -> np.ndarray:
        return destroy(self.N_max + 1)

    @property
    def H_S(self) -> np.ndarray:
        a = self.a
        return self.Omega * (a.conj().T @ a)

    @property
    def H_U(self) -> np.ndarray:
        return np.diag([-self.Delta / 2, self.Delta / 2]).astype(complex)

    @property
    def rho_U(self) -> np.ndarray:
        return np.diag([1 - self.p_excited, self.p_excited]).astype(complex)

    @property
    def V_SU(self) -> np.ndarray:
        a = self.a
        lower = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
        return self.g * (np.kron(a.conj().T, lower) + np.kron(a, lower.T))

    @property
    def bath(self) -> ThermalBathSpec:
        a = self.a
        return ThermalBathSpec(self.beta, (a + a.conj().T,), profile="flat", gamma0=self.kappa)

    def interaction_time(self, n_mean: float) -> float:
        if self.tau_prime is not None:
            return self.tau_prime
        if self.g == 0:
            return 0.0
        return math.pi / (2 * self.g * math.sqrt(n_mean + 1))

    @property
    def thermal_mean(self) -> float:
        return 1.0 / math.expm1(self.beta * self.Omega)


@dataclass
class MaserResult:
    photon_numbers: np.ndarray
    ledgers: list
    classifications: list
    rho_S: np.ndarray
    max_top_population: float
    converged: bool
    thermal_mean: float
    extras: dict = field(default_factory=dict)

    @property
    def classification(self) -> Classification:
        return self.classifications[-1]

    @property
    def pumped_above_thermal(self) -> bool:
        return bool(self.photon_numbers[-1] > self.thermal_mean)


def maser_run(spec: MaserSpec, n_intervals: int = 200, rho_S0: np.ndarray | None = None,
              tol: float | None = None, work_tol: float = 1e-3) -> MaserResult:
    """Run atoms through the cavity one at a time.

    Starts from the thermal cavity unless ``rho_S0`` is given. With ``tol``
    the run stops early once the mean photon number changes by less than
    ``tol`` between intervals. Each interval is classified with a
    work-reservoir tolerance ``work_tol`` on ``|dS_U|``.

    Raises
    ------
    TruncationLeakError
        If the top Fock level population exceeds ``1e-6``.
    """
    H_S = spec.H_S
    N = H_S.shape[0]
    num = spec.a.conj().T @ spec.a
    rho = gibbs_state(H_S, spec.beta) if rho_S0 is None else np.asarray(rho_S0, dtype=complex)
    reservoir = WeakReservoir(spec.bath, during_interaction=False)
    ns = [expectation(num, rho)]
    ledgers, classes = [], []
    top = float(np.real(rho[N - 1, N - 1]))
    converged = False
    for _ in range(n_intervals):
        tp = spec.interaction_time(ns[-1])
        stream = UnitStreamSpec(H_U=spec.H_U, rho_U=spec.rho_U, tau=tp + spec.tau_free,
                                tau_prime=tp, V_SU=spec.V_SU)
        state, ledger = run_interval(rho, H_S, stream, reservoir)
        rho = state.rho_S
        top = max(top, float(np.real(rho[N - 1, N - 1])))
        if top > LEAK_TOL:
            raise TruncationLeakError(
                f"top Fock level population {top:.2e} exceeds {LEAK_TOL:.0e}; increase N_max")
        ledgers.append(ledger)
        classes.append(classify_stream(ledger, state.rho_U, stream, work_tol=work_tol))
        ns.append(expectation(num, rho))
        if tol is not None and abs(ns[-1] - ns[-2]) < tol:
            converged = True
            break
    if tol is not None and not converged:
        warnings.warn("photon number did not settle within the interval budget", RuntimeWarning,
                      stacklevel=2)
    return MaserResult(photon_numbers=np.array(ns), ledgers=ledgers, classifications=classes,
                       rho_S=rho, max_top_population=top, converged=converged,
                       thermal_mean=spec.thermal_mean)
