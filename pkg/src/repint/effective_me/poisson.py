"""Systems kicked by units at Poisson-distributed times."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from ..generators import (NonUniqueSteadyStateError, ThermalBathSpec, apply_superop,
                          hamiltonian_superop, heat_rate, steady_state, thermal_generator, unvec, vec)
from ..operators import (dagger, density_matrix, expectation, hermitian_log, is_hermitian,
                         mutual_information, partial_trace, permute_subsystems, relative_entropy,
                         unitary_from, von_neumann_entropy)


@dataclass(frozen=True)
class PoissonKickSpec:
    """Kicks ``U = exp(-i V)`` arriving at rate ``gamma``.

    Give either ``V`` (Hermitian, on system x unit) or the unitary ``U``.
    ``bath`` adds a weakly coupled reservoir acting on the system between
    kicks; ``beta_units`` declares the units thermal at that inverse
    temperature.
    """

    gamma: float
    H_S: np.ndarray
    H_U: np.ndarray
    rho_U: np.ndarray
    V: np.ndarray | None = None
    U: np.ndarray | None = None
    bath: ThermalBathSpec | None = None
    beta_units: float | None = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("kick rate must be non-negative")
        object.__setattr__(self, "rho_U", density_matrix(self.rho_U))
        if (self.V is None) == (self.U is None):
            raise ValueError("give exactly one of V or U")
        if self.U is None:
            if not is_hermitian(self.V):
                raise ValueError("V must be Hermitian")
            object.__setattr__(self, "U", unitary_from(self.V, 1.0))
        U = np.asarray(self.U, dtype=complex)
        d = self.H_S.shape[0] * self.H_U.shape[0]
        if U.shape != (d, d) or not np.allclose(U @ dagger(U), np.eye(d), atol=1e-10):
            raise ValueError("kick must be a unitary on system x unit")
        object.__setattr__(self, "U", U)

    @property
    def dims(self):
        return (self.H_S.shape[0], self.H_U.shape[0])


@dataclass(frozen=True)
class RateLedger:
    """Instantaneous energy and entropy rates of the system and the unit stream."""

    dE_S: float
    dE_U: float
    W_S: float
    W_SU: float
    Q: float
    dS_S: float
    dS_U: float
    Sigma_S: float
    lower_bound: float
    Sigma_eff: float
    beta: float
    first_law_residual: float

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list[float]:
        return [getattr(self, k) for k in self.header()]


def kraus_operators(U: np.ndarray, rho_U: np.ndarray, dims: tuple[int, int]) -> list[np.ndarray]:
    """``A_kl = sqrt(p_k) <l|U|k>`` of the reduced map ``rho -> tr_U U (rho x rho_U) U^dag``."""
    d_S, d_U = dims
    p, vecs = np.linalg.eigh(rho_U)
    t = U.reshape(d_S, d_U, d_S, d_U)
    ops = []
    for k in range(d_U):
        if p[k] <= 1e-15:
            continue
        for l in range(d_U):
            a = np.einsum("u,iujv,v->ij", vecs[:, l].conj(), t, vecs[:, k])
            ops.append(np.sqrt(p[k]) * a)
    return ops


def _swap_factors(U, dims):
    d_S, d_U = dims
    return permute_subsystems(U, dims, [1, 0]), (d_U, d_S)


def jump_superoperators(U: np.ndarray, rho_U: np.ndarray, dims: tuple[int, int],
                        rho_S: np.ndarray | None = None):
    """Reduced kick maps as superoperators.

    Returns ``(J_S, J_U)``. ``J_S rho = tr_U U (rho x rho_U) U^dag``; ``J_U``
    is the map on unit states for the given ``rho_S`` (``None`` if no system
    state is given).
    """
    J_S = sum(np.kron(a.conj(), a) for a in kraus_operators(U, rho_U, dims))
    J_U = None
    if rho_S is not None:
        Uswap, sdims = _swap_factors(U, dims)
        J_U = sum(np.kron(a.conj(), a) for a in kraus_operators(Uswap, rho_S, sdims))
    return J_S, J_U


def background_generator(spec: PoissonKickSpec) -> np.ndarray:
    if spec.bath is None:
        return hamiltonian_superop(spec.H_S)
    return thermal_generator(spec.H_S, spec.bath)


def poisson_generator(spec: PoissonKickSpec) -> np.ndarray:
    """``L_0 + gamma (J_S - 1)``."""
    J_S, _ = jump_superoperators(spec.U, spec.rho_U, spec.dims)
    d2 = J_S.shape[0]
    return background_generator(spec) + spec.gamma * (J_S - np.eye(d2))


def _entropy_rate(Lrho: np.ndarray, rho: np.ndarray) -> float:
    return float(-np.real(np.trace(Lrho @ hermitian_log(rho))))


def _steady_or_none(L):
    try:
        return steady_state(L)
    except (NonUniqueSteadyStateError, ValueError):
        return None


def naive_effective_sigma(L0: np.ndarray, L_new: np.ndarray, rho: np.ndarray) -> float:
    """Sum of the Spohn functionals of ``L0`` and ``L_new``, each relative to its own steady state.

    Returns ``nan`` if either steady state is not unique.
    """
    r0, r1 = _steady_or_none(L0), _steady_or_none(L_new)
    if r0 is None or r1 is None:
        return math.nan
    d = rho.shape[0]
    lr = hermitian_log(rho)
    return float(-np.real(np.trace(unvec(L0 @ vec(rho), d) @ (lr - hermitian_log(r0))))
                 - np.real(np.trace(unvec(L_new @ vec(rho), d) @ (lr - hermitian_log(r1)))))


def _kick(spec, rho):
    rho_SU = spec.U @ np.kron(rho, spec.rho_U) @ dagger(spec.U)
    return rho_SU, partial_trace(rho_SU, spec.dims, 0), partial_trace(rho_SU, spec.dims, 1)


def poisson_rates(spec: PoissonKickSpec, rho_S: np.ndarray) -> RateLedger:
    """Rates at system state ``rho_S``.

    ``Sigma_S = dS_S + dS_U - beta Q`` and ``lower_bound =
    gamma (D[J_S rho || rho] + I_SU[U rho rho_U U^dag])``.
    """
    rho = density_matrix(rho_S)
    g = spec.gamma
    L0 = background_generator(spec)
    J_S, _ = jump_superoperators(spec.U, spec.rho_U, spec.dims)
    L_new = g * (J_S - np.eye(J_S.shape[0]))
    Lrho = apply_superop(L0 + L_new, rho)
    rho_SU, JS_rho, JU_rhoU = _kick(spec, rho)

    beta = spec.bath.beta if spec.bath is not None else math.nan
    Q = heat_rate(spec.H_S, L0, rho) if spec.bath is not None else 0.0
    dE_S = expectation(spec.H_S, Lrho)
    dE_U = g * expectation(spec.H_U, JU_rhoU - spec.rho_U)
    H_X = np.kron(spec.H_S, np.eye(spec.dims[1])) + np.kron(np.eye(spec.dims[0]), spec.H_U)
    W_SU = g * expectation(H_X, rho_SU - np.kron(rho, spec.rho_U))
    dS_S = _entropy_rate(Lrho, rho)
    dS_U = g * (von_neumann_entropy(JU_rhoU) - von_neumann_entropy(spec.rho_U))
    bq = beta * Q if spec.bath is not None else 0.0
    lower = g * (relative_entropy(JS_rho, rho) + mutual_information(rho_SU, spec.dims, 0))
    return RateLedger(
        dE_S=dE_S, dE_U=dE_U, W_S=0.0, W_SU=W_SU, Q=Q, dS_S=dS_S, dS_U=dS_U,
        Sigma_S=dS_S + dS_U - bq, lower_bound=lower,
        Sigma_eff=naive_effective_sigma(L0, L_new, rho) if spec.bath is not None else math.nan,
        beta=beta, first_law_residual=dE_S - Q - W_SU + dE_U,
    )


@dataclass(frozen=True)
class EnsembleRates:
    """Unit-side rates when only the ensemble of all units is tracked."""

    dE_U: float
    dS_U_bar: float
    Sigma_S_bar: float
    clausius_residual: float


def ensemble_rates(spec: PoissonKickSpec, rho_S: np.ndarray) -> EnsembleRates:
    """``dS_U_bar = -gamma tr[(J_U - 1) rho_U] ln rho_U``.

    ``clausius_residual`` is ``dS_U_bar - beta_units dE_U`` when the units are
    declared thermal, otherwise ``nan``.
    """
    rho = density_matrix(rho_S)
    g = spec.gamma
    _, J_U = jump_superoperators(spec.U, spec.rho_U, spec.dims, rho_S=rho)
    delta = apply_superop(J_U, spec.rho_U) - spec.rho_U
    ln_u = hermitian_log(spec.rho_U)
    # weight leaving the unit's support makes the ensemble entropy rate infinite
    w, v = np.linalg.eigh(spec.rho_U)
    off = v[:, w <= 1e-12]
    leak = np.real(np.trace(dagger(off) @ delta @ off)) if off.size else 0.0
    dS_bar = math.inf if leak > 1e-12 else -g * float(np.real(np.trace(delta @ ln_u)))
    dE_U = g * expectation(spec.H_U, delta)
    L = poisson_generator(spec)
    Lrho = apply_superop(L, rho)
    dS_S = _entropy_rate(Lrho, rho)
    Q = heat_rate(spec.H_S, background_generator(spec), rho) if spec.bath is not None else 0.0
    bq = spec.bath.beta * Q if spec.bath is not None else 0.0
    clausius = dS_bar - spec.beta_units * dE_U if spec.beta_units is not None else math.nan
    return EnsembleRates(dE_U=dE_U, dS_U_bar=dS_bar, Sigma_S_bar=dS_S + dS_bar - bq,
                         clausius_residual=clausius)


def entropy_bookkeeping_residual(spec: PoissonKickSpec, rho_S: np.ndarray) -> float:
    """``S(rho) + S(rho_U) - S(J_S rho) - S(J_U rho_U) + I`` for one kick (zero for unitary kicks)."""
    rho = density_matrix(rho_S)
    rho_SU, a, b = _kick(spec, rho)
    return (von_neumann_entropy(rho) + von_neumann_entropy(spec.rho_U)
            - von_neumann_entropy(a) - von_neumann_entropy(b) + mutual_information(rho_SU, spec.dims, 0))
