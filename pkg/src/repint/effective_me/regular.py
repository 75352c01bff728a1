"""Units arriving every ``dt`` with coupling ``V/sqrt(dt)``, in the limit ``dt -> 0``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..generators import apply_superop, hamiltonian_superop, vec
from ..operators import (dagger, density_matrix, expectation, hermitian_log, is_hermitian,
                         mutual_information, partial_trace, unitary_from)
from .poisson import RateLedger


class CenteringError(ValueError):
    """The coupling has a non-zero mean in the unit state."""


@dataclass(frozen=True)
class RegularKickSpec:
    """Units in state ``rho_U`` coupled through ``V_tilde / sqrt(dt)`` for time ``dt``.

    ``decomposition`` optionally lists ``(A_k, B_k)`` with
    ``V_tilde = sum_k A_k x B_k``; otherwise an operator-Schmidt
    decomposition is computed. ``beta_units`` declares thermal units.
    """

    H_S: np.ndarray
    H_U: np.ndarray
    rho_U: np.ndarray
    V_tilde: np.ndarray
    dt: float = 1e-3
    decomposition: tuple | None = None
    beta_units: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "rho_U", density_matrix(self.rho_U))
        if not is_hermitian(self.V_tilde):
            raise ValueError("V_tilde must be Hermitian")
        d = self.H_S.shape[0] * self.H_U.shape[0]
        if self.V_tilde.shape != (d, d):
            raise ValueError("V_tilde must act on system x unit")
        mean = partial_trace(self.V_tilde @ np.kron(np.eye(self.dims[0]), self.rho_U), self.dims, 0)
        if np.max(np.abs(mean)) > 1e-10:
            raise CenteringError(f"tr_U(V rho_U) is non-zero (max entry {np.max(np.abs(mean)):.2e})")

    @property
    def dims(self):
        return (self.H_S.shape[0], self.H_U.shape[0])


def operator_schmidt(V: np.ndarray, dims: tuple[int, int], tol: float = 1e-14):
    """Pairs ``(A_k, B_k)`` with ``V = sum_k A_k x B_k``."""
    d_S, d_U = dims
    M = V.reshape(d_S, d_U, d_S, d_U).transpose(0, 2, 1, 3).reshape(d_S * d_S, d_U * d_U)
    u, s, vh = np.linalg.svd(M)
    keep = s > tol * max(s[0], 1e-300)
    return [(np.sqrt(sk) * u[:, k].reshape(d_S, d_S), np.sqrt(sk) * vh[k].reshape(d_U, d_U))
            for k, sk in enumerate(s) if keep[k]]


def regular_kick_generator(spec: RegularKickSpec, hamiltonian: bool = True) -> np.ndarray:
    """``-i[H_S,.] + sum_kl <B_l B_k> (A_k rho A_l - {A_l A_k, rho}/2)``."""
    pairs = spec.decomposition or operator_schmidt(spec.V_tilde, spec.dims)
    d = spec.dims[0]
    eye = np.eye(d)
    L = np.zeros((d * d, d * d), dtype=complex)
    for A_k, B_k in pairs:
        for A_l, B_l in pairs:
            c = np.trace(B_l @ B_k @ spec.rho_U)
            if abs(c) < 1e-300:
                continue
            AA = A_l @ A_k
            L += c * (np.kron(A_l.T, A_k) - 0.5 * np.kron(eye, AA) - 0.5 * np.kron(AA.T, eye))
    return L + hamiltonian_superop(spec.H_S) if hamiltonian else L


def double_commutator_generator(spec: RegularKickSpec) -> np.ndarray:
    """Dissipative part built directly from ``-tr_U [V,[V, rho x rho_U]] / 2``."""
    d = spec.dims[0]
    V = spec.V_tilde
    L = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for i in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1
            X = np.kron(E, spec.rho_U)
            C = V @ (V @ X - X @ V) - (V @ X - X @ V) @ V
            L[:, j * d + i] = vec(-0.5 * partial_trace(C, spec.dims, 0))
    return L


def _dlog_quadratic(Y: np.ndarray, rho: np.ndarray) -> float:
    """``(1/2) <Y, dlog_rho(Y)>``: the second-order term of ``D(rho + Y || rho)``."""
    p, v = np.linalg.eigh(rho)
    Yb = dagger(v) @ Y @ v
    pi, pj = p[:, None], p[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        K = np.where(np.isclose(pi, pj, rtol=1e-12, atol=1e-300), 1.0 / pi,
                     (np.log(pi) - np.log(pj)) / (pi - pj))
    return 0.5 * float(np.real(np.sum(np.abs(Yb) ** 2 * K)))


@dataclass(frozen=True)
class RegularKickRates:
    ledger: RateLedger
    dS_U_bar: float
    mixing: float
    Sigma_comparison: float
    divergent_coefficient: float


def regular_kick_rates(spec: RegularKickSpec, rho_S: np.ndarray) -> RegularKickRates:
    """Rates in the ``dt -> 0`` limit.

    ``mixing`` is the limit of ``D(J_U rho_U || rho_U) / dt``. For thermal
    units ``Sigma_comparison = dS_S + beta' dE_U`` exceeds ``Sigma_S`` by
    exactly ``mixing``. ``divergent_coefficient`` multiplies ``dt**-1/2`` in
    the unit energy rate; it vanishes when ``[H_U, rho_U] = 0``.
    """
    rho = density_matrix(rho_S)
    V = spec.V_tilde
    X = np.kron(rho, spec.rho_U)
    C1 = V @ X - X @ V
    C2 = V @ C1 - C1 @ V
    d_S, d_U = spec.dims
    eye_S, eye_U = np.eye(d_S), np.eye(d_U)
    HU = np.kron(eye_S, spec.H_U)
    HS = np.kron(spec.H_S, eye_U)

    div = float(np.real(-1j * np.trace(HU @ C1)))
    if abs(div) > 1e-10:
        warnings.warn(f"unit energy rate has a dt**-1/2 term with coefficient {div:.3e}; "
                      "it is excluded from the finite rates", RuntimeWarning, stacklevel=2)
    dE_U = -0.5 * expectation(HU, C2)
    W_SU = -0.5 * expectation(HS + HU, C2)
    L = regular_kick_generator(spec)
    Lrho = apply_superop(L, rho)
    dE_S = expectation(spec.H_S, Lrho)
    dS_S = float(-np.real(np.trace(Lrho @ hermitian_log(rho))))

    Y = -1j * partial_trace(C1, spec.dims, 1)
    mixing = _dlog_quadratic(Y, spec.rho_U)
    dS_U_bar = 0.5 * expectation(np.kron(eye_S, hermitian_log(spec.rho_U)), C2)
    dS_U = dS_U_bar - mixing
    Sigma_S = dS_S + dS_U
    comparison = dS_S + spec.beta_units * dE_U if spec.beta_units is not None else math.nan
    ledger = RateLedger(dE_S=dE_S, dE_U=dE_U, W_S=0.0, W_SU=W_SU, Q=0.0, dS_S=dS_S, dS_U=dS_U,
                        Sigma_S=Sigma_S, lower_bound=0.0, Sigma_eff=math.nan, beta=math.nan,
                        first_law_residual=dE_S - W_SU + dE_U)
    return RegularKickRates(ledger=ledger, dS_U_bar=dS_U_bar, mixing=mixing,
                            Sigma_comparison=comparison, divergent_coefficient=div)


def collision_step(spec: RegularKickSpec, dt: float | None = None) -> np.ndarray:
    """Superoperator of one exact finite-``dt`` collision on the system."""
    dt = spec.dt if dt is None else dt
    d_S, d_U = spec.dims
    H = np.kron(spec.H_S, np.eye(d_U)) + np.kron(np.eye(d_S), spec.H_U) + spec.V_tilde / np.sqrt(dt)
    U = unitary_from(H, dt)
    M = np.zeros((d_S * d_S,) * 2, dtype=complex)
    for j in range(d_S):
        for i in range(d_S):
            E = np.zeros((d_S, d_S), dtype=complex)
            E[i, j] = 1
            M[:, j * d_S + i] = vec(partial_trace(U @ np.kron(E, spec.rho_U) @ dagger(U), spec.dims, 0))
    return M


def finite_step_information_rate(spec: RegularKickSpec, rho_S: np.ndarray, dt: float) -> float:
    """``I_SU / dt`` after one exact collision of length ``dt``."""
    d_S, d_U = spec.dims
    H = np.kron(spec.H_S, np.eye(d_U)) + np.kron(np.eye(d_S), spec.H_U) + spec.V_tilde / np.sqrt(dt)
    U = unitary_from(H, dt)
    out = U @ np.kron(rho_S, spec.rho_U) @ dagger(U)
    return mutual_information(out, spec.dims, 0) / dt
