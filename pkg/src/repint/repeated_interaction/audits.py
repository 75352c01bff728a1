"""Post-hoc audits of interval ledgers: unit classes, erasure bounds, cycles."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from ..generators import ThermalBathSpec
from ..operators import (dephase, gibbs_state, hermitian_log, nonequilibrium_free_energy,
                         relative_entropy, trace_distance, von_neumann_entropy)
from .fixed_point import stroboscopic_fixed_point
from .interval import ThermoLedger, UnitStreamSpec, WeakReservoir, run_interval


class ReservoirClass(enum.Enum):
    IDEAL_HEAT = "ideal_heat"
    IDEAL_WORK = "ideal_work"
    IDEAL_INFORMATION = "ideal_information"
    GENERIC = "generic"
    INERT = "inert"


@dataclass(frozen=True)
class Classification:
    reservoir_class: ReservoirClass
    entropy_energy_ratio: float
    unit_relative_entropy: float
    efficiency_lhs: float
    efficiency_rhs: float

    @property
    def efficiency_slack(self) -> float:
        return self.efficiency_lhs - self.efficiency_rhs


def classify_stream(ledger: ThermoLedger, rho_U_final: np.ndarray, stream: UnitStreamSpec,
                    beta_prime: float | None = None, *, heat_tol: float = 0.01,
                    work_tol: float = 1e-6, info_tol: float = 1e-6,
                    inert_tol: float = 1e-12) -> Classification:
    """Sort a unit stream into a reservoir class from its entropy/energy balance.

    * heat: ``dS_U / dE_U`` within ``heat_tol`` (relative) of ``beta_prime > 0``;
    * work: ``|dS_U| < work_tol * max(1, |beta dE_U|)``;
    * information: ``|beta dE_U| < info_tol * max(1, |dS_U|)``;
    * inert: both changes below ``inert_tol``.

    For thermal units the efficiency bound
    ``W - dF_S - (1 - T/T') dE_U >= T (D + I_SU)`` is evaluated, where ``D`` is
    the outgoing unit's relative entropy to the Gibbs state at ``beta_prime``.
    A negative ``beta_prime`` is reported but never classed as heat.
    """
    dE, dS = ledger.dE_U, ledger.dS_U
    beta = ledger.beta if math.isfinite(ledger.beta) else 1.0
    ratio = dS / dE if dE != 0 else (math.copysign(math.inf, dS) if dS != 0 else math.nan)

    D = lhs = rhs = math.nan
    if beta_prime is not None:
        D = relative_entropy(rho_U_final, gibbs_state(stream.H_U, beta_prime))
        if math.isfinite(ledger.beta):
            T, Tp = 1 / ledger.beta, 1 / beta_prime
            lhs = ledger.W - ledger.dF_S - (1 - T / Tp) * dE
            rhs = T * (D + ledger.I_SU)

    if abs(dE) < inert_tol and abs(dS) < inert_tol:
        cls = ReservoirClass.INERT
    elif abs(dS) < work_tol * max(1.0, abs(beta * dE)):
        cls = ReservoirClass.IDEAL_WORK
    elif abs(beta * dE) < info_tol * max(1.0, abs(dS)):
        cls = ReservoirClass.IDEAL_INFORMATION
    elif beta_prime is not None and beta_prime > 0 and abs(ratio - beta_prime) < heat_tol * beta_prime:
        cls = ReservoirClass.IDEAL_HEAT
    else:
        cls = ReservoirClass.GENERIC
    return Classification(cls, ratio, D, lhs, rhs)


@dataclass(frozen=True)
class LandauerReport:
    steady: bool
    erasure: bool
    bound_lhs: float
    bound_rhs: float
    slack_energy: float
    T_Sigma_S: float

    @property
    def holds(self) -> bool:
        return self.bound_lhs >= self.bound_rhs - 1e-9


def landauer_audit(ledger: ThermoLedger, steady_tol: float = 1e-8) -> LandauerReport:
    """Check ``beta (W - dE_U) >= -dS_U``.

    Away from a stroboscopic steady state the system free-energy change is
    kept, ``beta (W - dE_U - dF_S) >= -dS_U``. The energy-unit slack equals
    ``T Sigma_S``.
    """
    beta = ledger.beta
    if not math.isfinite(beta) or beta <= 0:
        raise ValueError("Landauer audit needs a positive reservoir temperature")
    steady = abs(ledger.dE_S) < steady_tol and abs(ledger.dS_S) < steady_tol
    dF = 0.0 if steady else ledger.dF_S
    lhs = beta * (ledger.W - ledger.dE_U - dF)
    rhs = -ledger.dS_U
    return LandauerReport(steady=steady, erasure=ledger.dS_U < 0, bound_lhs=lhs, bound_rhs=rhs,
                          slack_energy=(lhs - rhs) / beta, T_Sigma_S=ledger.Sigma_S / beta)


class CycleNotClosedError(RuntimeError):
    """The resetter does not return units to their incoming state."""


@dataclass(frozen=True)
class CycleReport:
    W: float
    W_reset: float
    I: float
    I_reset: float
    beta: float
    reset_error: float
    Sigma_S: float
    Sigma_S_reset: float
    ledger: ThermoLedger
    ledger_reset: ThermoLedger

    @property
    def slack(self) -> float:
        """``beta (W + W') - (I + I')``."""
        return self.beta * (self.W + self.W_reset) - (self.I + self.I_reset)


def kelvin_planck_cycle(H_S, stream: UnitStreamSpec, reservoir, H_reset, reset_stream: UnitStreamSpec,
                        reset_reservoir, rho_S0: np.ndarray, rho_reset0: np.ndarray,
                        reset_tol: float = 1e-6) -> CycleReport:
    """Run system and resetter to their stroboscopic steady states and book the cycle.

    ``reset_stream.rho_U`` is a placeholder: the resetter receives the units
    leaving the first system. Both reservoirs must share one temperature.

    Raises
    ------
    CycleNotClosedError
        If the units leaving the resetter differ from ``stream.rho_U`` by more
        than ``reset_tol`` in trace distance.
    """
    if not np.isclose(reservoir.beta, reset_reservoir.beta):
        raise ValueError("both stages must use reservoirs at one temperature")
    fp = stroboscopic_fixed_point(rho_S0, H_S, stream, reservoir)
    state, led = run_interval(fp.rho, H_S, stream, reservoir)
    back = replace(reset_stream, rho_U=state.rho_U)
    fp2 = stroboscopic_fixed_point(rho_reset0, H_reset, back, reset_reservoir)
    state2, led2 = run_interval(fp2.rho, H_reset, back, reset_reservoir)
    err = trace_distance(state2.rho_U, stream.rho_U)
    if err > reset_tol:
        raise CycleNotClosedError(f"units leave the resetter {err:.2e} away from their incoming state")
    return CycleReport(W=led.W, W_reset=led2.W, I=led.I_SU, I_reset=led2.I_SU, beta=led.beta,
                       reset_error=err, Sigma_S=led.Sigma_S, Sigma_S_reset=led2.Sigma_S,
                       ledger=led, ledger_reset=led2)


def swap_resetter(stream: UnitStreamSpec, beta: float, tau_reset: float = 40.0, gamma0: float = 1.0):
    """Second stage that hands units back in their incoming state.

    The resetter's Hamiltonian ``-ln(rho_U) / beta`` makes ``rho_U`` its
    Gibbs state. Each interval swaps resetter and unit, then lets the
    resetter relax in a bath at ``beta`` for ``tau_reset``. Returns
    ``(H_reset, reset_stream, reset_reservoir, rho_reset0)`` for
    :func:`kelvin_planck_cycle`.
    """
    d = stream.d_U
    if np.min(np.linalg.eigvalsh(stream.rho_U)) <= 1e-12:
        raise ValueError("the resetter needs a full-rank unit state")
    H_reset = -hermitian_log(stream.rho_U) / beta
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[j * d + i, i * d + j] = 1.0
    couplings = []
    for i in range(d):
        for j in range(i + 1, d):
            c = np.zeros((d, d))
            c[i, j] = c[j, i] = 1.0
            couplings.append(c)
    reset_stream = UnitStreamSpec(H_U=stream.H_U, rho_U=stream.rho_U, tau=tau_reset, tau_prime=0.0,
                                  kick=swap, dt_max=stream.dt_max)
    reservoir = WeakReservoir(ThermalBathSpec(beta, tuple(couplings), gamma0=gamma0))
    return H_reset, reset_stream, reservoir, gibbs_state(H_reset, beta)


def classical_floor_check(rho: np.ndarray, H: np.ndarray, T: float) -> dict:
    """Compare ``F(rho)`` with the free energy of ``rho`` dephased in the energy eigenbasis.

    Degenerate eigenspaces use the basis returned by ``eigh``.
    """
    rho_cl = dephase(rho, H)
    F = nonequilibrium_free_energy(rho, H, T)
    F_cl = nonequilibrium_free_energy(rho_cl, H, T)
    return {
        "F": F,
        "F_classical": F_cl,
        "gap": F - F_cl,
        "entropy_gain": von_neumann_entropy(rho_cl) - von_neumann_entropy(rho),
        "diagonal": bool(np.allclose(rho, rho_cl, atol=1e-12)),
    }
