"""Cavity pumped by three-level atoms carrying a coherence between their lower levels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..generators import dissipator
from ..operators import basis, destroy
from ..effective_me import RegularKickSpec, regular_kick_generator


class LindbladViolationError(ValueError):
    """The unit state would give a negative emission rate."""


class LasingThresholdError(ValueError):
    """Gain exceeds loss: the photon number has no finite steady state."""


@dataclass(frozen=True)
class LWISpec:
    """Unit state with populations ``P_a, P_b, P_c`` and coherence ``rho_bc``.

    Levels are ordered ``(a, b, c)``; ``a`` is the upper level. The atoms
    couple with strength ``g = sqrt(gamma_eff)``.
    """

    P_a: float
    P_b: float
    P_c: float
    rho_bc: complex = 0.0
    gamma_eff: float = 1.0
    Omega: float = 1.0
    beta: float = 1.0
    N_max: int = 30

    def __post_init__(self):
        P = np.array([self.P_a, self.P_b, self.P_c])
        if np.any(P < 0) or abs(P.sum() - 1) > 1e-12:
            raise ValueError("populations must be non-negative and sum to one")
        if abs(self.rho_bc) ** 2 > self.P_b * self.P_c + 1e-15:
            raise LindbladViolationError("|rho_bc|^2 exceeds P_b P_c: unit state is not positive")
        if self.emission_weight < 0:
            raise LindbladViolationError("P_b + P_c + 2 Re(rho_bc) is negative")
        if self.gamma_eff <= 0 or self.N_max < 2:
            raise ValueError("need gamma_eff > 0 and N_max >= 2")

    @classmethod
    def thermal(cls, beta: float, Omega: float = 1.0, **kw) -> "LWISpec":
        """Gibbs populations with ``E_a - E_b = E_a - E_c = Omega`` and no coherence."""
        w = np.array([math.exp(-beta * Omega / 2), math.exp(beta * Omega / 2), math.exp(beta * Omega / 2)])
        w /= w.sum()
        return cls(P_a=w[0], P_b=w[1], P_c=w[2], Omega=Omega, beta=beta, **kw)

    @property
    def emission_weight(self) -> float:
        return self.P_b + self.P_c + 2 * float(np.real(self.rho_bc))

    @property
    def rho_U(self) -> np.ndarray:
        r = np.diag([self.P_a, self.P_b, self.P_c]).astype(complex)
        r[1, 2] = self.rho_bc
        r[2, 1] = np.conj(self.rho_bc)
        return r

    @property
    def a(self) -> np.ndarray:
        return destroy(self.N_max + 1)


def _couplings(spec: LWISpec):
    g = math.sqrt(spec.gamma_eff)
    ket = [basis(3, k) for k in range(3)]
    flip = lambda i, j: np.outer(ket[i], ket[j].conj())
    a = spec.a
    return [(a, -g * flip(0, 1)), (a, -g * flip(0, 2)),
            (a.conj().T, -g * flip(1, 0)), (a.conj().T, -g * flip(2, 0))]


def lwi_kick_spec(spec: LWISpec) -> RegularKickSpec:
    """Interaction-picture regular-kick setup with the Lambda-type coupling."""
    pairs = _couplings(spec)
    V = sum(np.kron(A, B) for A, B in pairs)
    d = spec.N_max + 1
    return RegularKickSpec(H_S=np.zeros((d, d)), H_U=np.zeros((3, 3)), rho_U=spec.rho_U,
                           V_tilde=V, decomposition=tuple(pairs))


def lwi_closed_form_generator(spec: LWISpec) -> np.ndarray:
    """``gamma_eff (2 P_a D[a^dag] + (P_b + P_c + 2 Re rho_bc) D[a])``."""
    a = spec.a
    return spec.gamma_eff * (2 * spec.P_a * dissipator(a.conj().T) + spec.emission_weight * dissipator(a))


def lwi_generator(spec: LWISpec, check_tol: float = 1e-10) -> np.ndarray:
    """Generator from the unit correlation functions, cross-checked against the closed form."""
    L = regular_kick_generator(lwi_kick_spec(spec))
    gap = np.max(np.abs(L - lwi_closed_form_generator(spec)))
    if gap > check_tol:
        raise AssertionError(f"correlation and closed-form generators differ by {gap:.2e}")
    return L


def lwi_steady_number(spec: LWISpec) -> float:
    """``<a^dag a>`` in the steady state of the generator on the truncated space.

    The diagonal of the generator closes on itself, so the steady photon
    distribution is the null vector of the population block.
    """
    L = lwi_generator(spec)
    d = spec.N_max + 1
    diag = [i * (d + 1) for i in range(d)]
    G = np.real(L[np.ix_(diag, diag)])
    _, s, vh = np.linalg.svd(G)
    p = vh[-1] / vh[-1].sum()
    return float(np.dot(np.arange(d), p))


def lwi_photon_number(spec: LWISpec, times, N0: float = 0.0):
    """Solution of ``dN/dt = gamma_eff (2 P_a (1 + N) - w N)`` and its limit ``N_eff``.

    Raises
    ------
    LasingThresholdError
        If ``w - 2 P_a <= 0``, with ``w = P_b + P_c + 2 Re rho_bc``.
    """
    rate = spec.emission_weight - 2 * spec.P_a
    if rate <= 0:
        raise LasingThresholdError(
            f"P_b + P_c - 2 P_a + 2 Re(rho_bc) = {rate:.3g} <= 0: no finite steady state")
    N_eff = 2 * spec.P_a / rate
    t = np.asarray(times, dtype=float)
    return N_eff + (N0 - N_eff) * np.exp(-spec.gamma_eff * rate * t), N_eff
