"""Single-level quantum dot under measurement-based feedback by a stream of bits.

Each bit copies the dot's occupation with error ``eps_ms``; the tunnelling
rates to the two leads are then switched according to the bit.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from ..generators import dissipator
from ..operators import partial_trace, projector, sigma_x

EMPTY, FILLED = 0, 1
LEADS = ("L", "R")
SWEEP_HEADER = ["V", "eps", "I_L", "info_rate", "sigma_total", "sigma_eff", "chem_work_rate"]


@dataclass(frozen=True)
class DemonSpec:
    eps_ms: float
    delta_fb: float = math.log(2)
    Gamma: float = 1.0
    beta: float = 0.1
    mu_L: float = 0.5
    mu_R: float = -0.5
    eps_S: float = 0.0

    def __post_init__(self):
        if not 0 <= self.eps_ms <= 1:
            raise ValueError("eps_ms must lie in [0, 1]")
        if self.Gamma <= 0 or self.beta <= 0:
            raise ValueError("Gamma and beta must be positive")

    @classmethod
    def symmetric(cls, V: float, eps_ms: float, eps_S: float = 0.0, **kw) -> "DemonSpec":
        """Bias split symmetrically around the dot level."""
        return cls(eps_ms=eps_ms, mu_L=eps_S + V / 2, mu_R=eps_S - V / 2, eps_S=eps_S, **kw)

    @property
    def V(self) -> float:
        return self.mu_L - self.mu_R

    def fermi(self, lead: str) -> float:
        mu = self.mu_L if lead == "L" else self.mu_R
        return 1.0 / (math.exp(self.beta * (self.eps_S - mu)) + 1.0)

    def bare_rate(self, lead: str, bit: int) -> float:
        """``Gamma exp(-delta)`` for (L, 0) and (R, 1), ``Gamma exp(delta)`` otherwise."""
        sign = -1 if (lead == "L") == (bit == 0) else 1
        return self.Gamma * math.exp(sign * self.delta_fb)


def effective_rates(spec: DemonSpec, lead: str) -> tuple[float, float]:
    """``(k_in, k_out)`` of one lead after averaging over the bit."""
    e, f = spec.eps_ms, spec.fermi(lead)
    g0, g1 = spec.bare_rate(lead, 0), spec.bare_rate(lead, 1)
    return ((1 - e) * g0 + e * g1) * f, ((1 - e) * g1 + e * g0) * (1 - f)


def lead_generator(spec: DemonSpec, lead: str, bit: int) -> np.ndarray:
    """Thermal dot generator for one lead with the rate selected by ``bit``."""
    f = spec.fermi(lead)
    G = spec.bare_rate(lead, bit)
    to_empty = np.outer(np.eye(2)[EMPTY], np.eye(2)[FILLED])
    return G * ((1 - f) * dissipator(to_empty) + f * dissipator(to_empty.T))


def _population_block(L):
    return np.real(L[np.ix_([0, 3], [0, 3])])


def _closed_form(spec: DemonSpec) -> np.ndarray:
    G = np.zeros((2, 2))
    for lead in LEADS:
        k_in, k_out = effective_rates(spec, lead)
        G += [[-k_in, k_out], [k_in, -k_out]]
    return G


def _composed(spec: DemonSpec) -> np.ndarray:
    """First-order term of measuring with a fresh bit, then evolving under the bit-selected rates."""
    rho_U = np.diag([1 - spec.eps_ms, spec.eps_ms]).astype(complex)
    U_ms = np.kron(projector(2, EMPTY), np.eye(2)) + np.kron(projector(2, FILLED), sigma_x())
    L = np.zeros((4, 4), dtype=complex)
    for bit in (0, 1):
        Pi = np.kron(np.eye(2), projector(2, bit))
        M = np.zeros((4, 4), dtype=complex)
        for j in range(2):
            for i in range(2):
                E = np.zeros((2, 2), dtype=complex)
                E[i, j] = 1
                out = Pi @ U_ms @ np.kron(E, rho_U) @ U_ms.conj().T @ Pi
                M[:, j * 2 + i] = partial_trace(out, (2, 2), 0).reshape(-1, order="F")
        L += sum(lead_generator(spec, lead, bit) for lead in LEADS) @ M
    return _population_block(L)


def demon_effective_generator(spec: DemonSpec, check_tol: float = 1e-10) -> np.ndarray:
    """2x2 rate matrix on ``(p_E, p_F)``.

    Built from the averaged rates and independently by composing the
    measurement with the bit-conditioned lead generators; the two must agree.
    """
    A, B = _closed_form(spec), _composed(spec)
    gap = np.max(np.abs(A - B))
    if gap > check_tol:
        raise AssertionError(f"generator routes differ by {gap:.2e}")
    return A


def steady_populations(spec: DemonSpec) -> tuple[float, float]:
    k_in = sum(effective_rates(spec, lead)[0] for lead in LEADS)
    k_out = sum(effective_rates(spec, lead)[1] for lead in LEADS)
    p_E = k_out / (k_in + k_out)
    return p_E, 1 - p_E


def information_rate(spec: DemonSpec) -> float:
    """Rate at which measurement correlations are consumed, summed over leads.

    Infinite for an error-free measurement, zero at ``eps_ms = 1/2``.
    """
    e = spec.eps_ms
    if e in (0.0, 1.0):
        return math.inf if e == 0.0 else -math.inf
    p_E, p_F = steady_populations(spec)
    gain = loss = 0.0
    for lead in LEADS:
        f = spec.fermi(lead)
        g0, g1 = spec.bare_rate(lead, 0), spec.bare_rate(lead, 1)
        gain += g0 * f * p_E + g1 * (1 - f) * p_F
        loss += g0 * (1 - f) * p_F + g1 * f * p_E
    return ((1 - e) * gain - e * loss) * math.log((1 - e) / e)


def information_rate_reduced(spec: DemonSpec) -> float:
    """Closed form of :func:`information_rate` for the symmetric bias.

    ``2 Gamma artanh(1 - 2 eps) ((1 - 2 eps) cosh(delta) - sinh(delta) tanh(beta V / 4))``.
    """
    e, d = spec.eps_ms, spec.delta_fb
    return 2 * spec.Gamma * math.atanh(1 - 2 * e) * (
        (1 - 2 * e) * math.cosh(d) - math.sinh(d) * math.tanh(spec.beta * spec.V / 4))


def information_rate_factored(spec: DemonSpec) -> float:
    """``2 Gamma (1 - 2 eps) artanh(1 - 2 eps) (cosh(delta) - (1 - 2 eps) sinh(delta) tanh(beta V / 4))``.

    Kept for comparison only. It agrees with the lead sum at ``eps = 1/2``
    but not in general.
    """
    e, d = spec.eps_ms, spec.delta_fb
    return 2 * spec.Gamma * (1 - 2 * e) * math.atanh(1 - 2 * e) * (
        math.cosh(d) - (1 - 2 * e) * math.sinh(d) * math.tanh(spec.beta * spec.V / 4))


@dataclass(frozen=True)
class DemonPoint:
    V: float
    eps: float
    I_L: float
    info_rate: float
    sigma_total: float
    sigma_eff: float
    chem_work_rate: float

    def row(self):
        return [getattr(self, k) for k in SWEEP_HEADER]

    @property
    def extracts_work(self) -> bool:
        return self.chem_work_rate < 0


def demon_thermo(spec: DemonSpec) -> DemonPoint:
    """Steady-state currents and entropy rates.

    ``chem_work_rate = beta (mu_L - mu_R) I_L`` is the entropy flow into the
    leads; ``sigma_total`` adds the information rate. ``sigma_eff`` is the
    sum over leads of each lead's Spohn term relative to its own stationary
    state, the estimate available without knowing the bits.
    """
    p_E, p_F = steady_populations(spec)
    currents, sigma_eff = {}, 0.0
    for lead in LEADS:
        k_in, k_out = effective_rates(spec, lead)
        J = k_in * p_E - k_out * p_F
        currents[lead] = J
        sigma_eff += J * math.log(k_in / k_out)
    chem = spec.beta * spec.V * currents["L"]
    info = information_rate(spec)
    return DemonPoint(V=spec.V, eps=spec.eps_ms, I_L=currents["L"], info_rate=info,
                      sigma_total=chem + info, sigma_eff=sigma_eff, chem_work_rate=chem)


def demon_sweep(base: DemonSpec, V_grid=None, eps_grid=None) -> list[DemonPoint]:
    """Sweep bias (symmetric around ``eps_S``) and/or measurement error."""
    Vs = [base.V] if V_grid is None else list(V_grid)
    es = [base.eps_ms] if eps_grid is None else list(eps_grid)
    return [demon_thermo(replace(base, eps_ms=e, mu_L=base.eps_S + V / 2, mu_R=base.eps_S - V / 2))
            for e in es for V in Vs]


def write_sweep_csv(points, path_or_buffer=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for p in points:
        w.writerow([repr(float(x)) for x in p.row()])
    text = buf.getvalue()
    if path_or_buffer is not None:
        if hasattr(path_or_buffer, "write"):
            path_or_buffer.write(text)
        else:
            with open(path_or_buffer, "w", newline="") as fh:
                fh.write(text)
    return text
