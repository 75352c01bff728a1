"""Information-driven engine: a three-state system writing on a tape of bits.

The model is classical. States are ordered ``(A0, B0, C0, A1, B1, C1)``,
letter first and bit second; the jump ``C0 <-> A1`` flips the bit and lifts
the joint energy by ``dw``. Per-interval quantities are booked into the
same :class:`ThermoLedger` used for quantum streams through diagonal
embeddings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from ..generators import steady_state
from ..operators import mutual_information, von_neumann_entropy
from ..repeated_interaction import (Classification, ThermoLedger, UnitStreamSpec, build_ledger,
                                    classify_stream, stroboscopic_fixed_point)

STATES = ("A0", "B0", "C0", "A1", "B1", "C1")
_UP, _DOWN = (3, 2), (2, 3)   # (row, col) of C0 -> A1 and A1 -> C0


@dataclass(frozen=True)
class MandalJarzynskiSpec:
    """``eps_bias`` sets ``beta dw = ln((1+eps)/(1-eps))``; incoming bits have ``p0 = (1+delta)/2``."""

    eps_bias: float
    delta_in: float
    tau: float
    beta: float = 1.0

    def __post_init__(self):
        if not -1 < self.eps_bias < 1:
            raise ValueError("eps_bias must lie in (-1, 1)")
        if not -1 <= self.delta_in <= 1:
            raise ValueError("delta_in must lie in [-1, 1]")
        if self.tau <= 0 or self.beta <= 0:
            raise ValueError("tau and beta must be positive")

    @property
    def dw(self) -> float:
        return math.log((1 + self.eps_bias) / (1 - self.eps_bias)) / self.beta

    @property
    def p_bits(self) -> np.ndarray:
        return np.array([(1 + self.delta_in) / 2, (1 - self.delta_in) / 2])


def mj_rate_matrix(eps_bias: float) -> np.ndarray:
    """6x6 rate matrix on ``(A0, B0, C0, A1, B1, C1)``; columns sum to zero."""
    if not -1 < eps_bias < 1:
        raise ValueError("eps_bias must lie in (-1, 1)")
    R = np.zeros((6, 6))
    for a, b in [(0, 1), (1, 2), (3, 4), (4, 5)]:
        R[a, b] = R[b, a] = 1.0
    R[_UP] = 1 - eps_bias
    R[_DOWN] = 1 + eps_bias
    R -= np.diag(R.sum(axis=0))
    return R


def _joint(p_S, p_U):
    # bit-major ordering of the rate matrix
    return np.kron(p_U, p_S)


def _to_su(p):
    """Reorder a bit-major vector to system x unit (letter-major)."""
    return p.reshape(2, 3).T.reshape(-1)


def transfer_matrix(spec: MandalJarzynskiSpec) -> np.ndarray:
    """3x3 stochastic map on the letter populations for one interval."""
    E = expm(mj_rate_matrix(spec.eps_bias) * spec.tau)
    p_U = spec.p_bits
    T = np.zeros((3, 3))
    for s in range(3):
        e = np.zeros(3)
        e[s] = 1
        out = E @ _joint(e, p_U)
        T[:, s] = out[:3] + out[3:]
    return T


def _diag_superop(T):
    """Embed a stochastic matrix as a superoperator that also kills coherences."""
    d = T.shape[0]
    M = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            M[i * d + i, j * d + j] = T[i, j]
    return M


@dataclass(frozen=True)
class MJResult:
    p_S: np.ndarray
    p_U_out: np.ndarray
    W_sw: float
    Q: float
    dS_U: float
    ledger: ThermoLedger
    classification: Classification
    iterations: int
    contraction_ratio: float

    @property
    def second_law_slack(self) -> float:
        """``dS_U - beta Q``; non-negative at the stroboscopic steady state."""
        return self.dS_U - self.ledger.beta * self.Q


def interval_balance(spec: MandalJarzynskiSpec, p_S: np.ndarray):
    """Propagate one interval from ``p_S`` and return ``(joint_out, W_sw, Q)``.

    ``Q`` is ``dw`` times the time-integrated net flux ``C0 -> A1``, computed
    from the augmented-matrix integral of the joint distribution, not from
    the bit populations.
    """
    R = mj_rate_matrix(spec.eps_bias)
    p0 = _joint(np.asarray(p_S, dtype=float), spec.p_bits)
    aug = np.zeros((7, 7))
    aug[:6, :6] = R
    aug[:6, 6] = p0
    E = expm(aug * spec.tau)
    p_out, integral = E[:6, :6] @ p0, E[:6, 6]
    net_up = R[_UP] * integral[_UP[1]] - R[_DOWN] * integral[_DOWN[1]]
    Q = spec.dw * net_up
    W_sw = -spec.dw * (p_out[3:].sum() - p0[3:].sum())
    return p_out, W_sw, Q


def mj_run(spec: MandalJarzynskiSpec, tol: float = 1e-14) -> MJResult:
    """Stroboscopic steady state of the engine and its per-interval balance."""
    M = _diag_superop(transfer_matrix(spec))
    fp = stroboscopic_fixed_point(np.eye(3) / 3, channel=M, tol=tol)
    p_S = np.real(np.diag(fp.rho)).copy()
    p_out, W_sw, Q = interval_balance(spec, p_S)
    p_U_out = np.array([p_out[:3].sum(), p_out[3:].sum()])
    rho_SU = np.diag(_to_su(p_out))
    p_S_out = p_out[:3] + p_out[3:]
    dS_U = von_neumann_entropy(np.diag(p_U_out)) - von_neumann_entropy(np.diag(spec.p_bits))
    dS_S = von_neumann_entropy(np.diag(p_S_out)) - von_neumann_entropy(np.diag(p_S))
    ledger = build_ledger(dE_S=0.0, dE_U=0.0, W_X=0.0, W_sw=W_sw, Q=Q, dS_S=dS_S, dS_U=dS_U,
                          I_SU=mutual_information(rho_SU, (3, 2), 0), beta=spec.beta)
    stream = UnitStreamSpec(H_U=np.zeros((2, 2)), rho_U=np.diag(spec.p_bits), tau=spec.tau)
    cls = classify_stream(ledger, np.diag(p_U_out), stream)
    return MJResult(p_S=p_S, p_U_out=p_U_out, W_sw=W_sw, Q=Q, dS_U=dS_U, ledger=ledger,
                    classification=cls, iterations=fp.iterations,
                    contraction_ratio=fp.contraction_ratio)


def mj_stationary_direct(spec: MandalJarzynskiSpec) -> np.ndarray:
    """Stroboscopic letter populations from the null space of ``T - 1``."""
    return np.real(np.diag(steady_state(_diag_superop(transfer_matrix(spec)) - np.eye(9))))
