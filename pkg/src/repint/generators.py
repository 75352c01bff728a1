"""Lindblad generators as superoperator matrices.

States are vectorised by stacking columns, ``vec(A X B) = (B^T kron A) vec(X)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm, svd

from .operators import dagger, hermitian_log, is_hermitian

__all__ = [
    "IntegrationError",
    "JumpTerm",
    "LindbladSpec",
    "NonUniqueSteadyStateError",
    "ThermalBathSpec",
    "apply_superop",
    "dissipator",
    "hamiltonian_superop",
    "heat_rate",
    "ldb_audit",
    "lindbladian",
    "propagate",
    "spohn_functional",
    "spost",
    "spre",
    "steady_state",
    "thermal_generator",
    "thermal_jumps",
    "unvec",
    "vec",
]


class IntegrationError(RuntimeError):
    """Time integration lost trace or failed its accuracy check."""


class NonUniqueSteadyStateError(RuntimeError):
    """The generator has more than one stationary state."""


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    d = int(round(np.sqrt(v.size))) if d is None else d
    return np.asarray(v).reshape(d, d, order="F")


def spre(a: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(a.shape[0]), a)


def spost(b: np.ndarray) -> np.ndarray:
    return np.kron(b.T, np.eye(b.shape[0]))


def apply_superop(L: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return unvec(L @ vec(rho), rho.shape[0])


def hamiltonian_superop(H: np.ndarray) -> np.ndarray:
    """Superoperator of ``-i[H, .]``."""
    return -1j * (spre(H) - spost(H))


def dissipator(A: np.ndarray) -> np.ndarray:
    """Superoperator of ``D[A] rho = A rho A^dag - {A^dag A, rho}/2``."""
    A = np.asarray(A, dtype=complex)
    ada = dagger(A) @ A
    eye = np.eye(A.shape[0])
    return np.kron(A.conj(), A) - 0.5 * np.kron(eye, ada) - 0.5 * np.kron(ada.T, eye)


def lindbladian(H: np.ndarray | None, jumps: Sequence = ()) -> np.ndarray:
    """``-i[H,.] + sum_k rate_k D[A_k]``.

    ``jumps`` holds operators or ``(operator, rate)`` pairs.
    """
    terms = []
    d = None
    if H is not None:
        terms.append(hamiltonian_superop(H))
        d = H.shape[0]
    for j in jumps:
        if isinstance(j, JumpTerm):
            a, r = j.operator, j.rate
        elif isinstance(j, tuple):
            a, r = j
        else:
            a, r = j, 1.0
        terms.append(r * dissipator(a))
        d = a.shape[0]
    if d is None:
        raise ValueError("empty generator")
    return sum(terms) if terms else np.zeros((d * d, d * d), dtype=complex)


@dataclass(frozen=True)
class LindbladSpec:
    """Hamiltonian plus a list of ``(jump operator, rate)`` pairs."""

    H: np.ndarray
    jumps: tuple = ()

    def generator(self) -> np.ndarray:
        return lindbladian(self.H, self.jumps)


# --- thermal generators ------------------------------------------------------

@dataclass(frozen=True)
class JumpTerm:
    """``rate * D[operator]``; ``omega`` is the energy the system loses per jump."""

    operator: np.ndarray
    rate: float
    omega: float


def _flat(omega, gamma0, cutoff):
    return gamma0 * np.ones_like(np.asarray(omega, dtype=float))


def _ohmic(omega, gamma0, cutoff):
    w = np.asarray(omega, dtype=float)
    out = gamma0 * w
    if cutoff is not None:
        out = out * np.exp(-w / cutoff)
    return out


_PROFILES = {"flat": _flat, "ohmic": _ohmic}


@dataclass(frozen=True)
class ThermalBathSpec:
    """Weakly coupled thermal reservoir.

    Parameters
    ----------
    beta:
        Inverse temperature.
    couplings:
        Hermitian system operators ``A_k``. Each couples to an independent
        bath with the same spectral profile, so the rate matrix is diagonal in
        ``k``.
    profile:
        ``"flat"``, ``"ohmic"`` or a callable ``omega -> rate``. For
        ``kms=True`` the profile is evaluated at ``omega >= 0`` (emission) and
        absorption rates follow from ``gamma(-w) = exp(-beta w) gamma(w)``.
        With ``kms=False`` a callable is used at every frequency as given.
    gamma0, cutoff:
        Parameters of the built-in profiles.
    bin_tol:
        Absolute tolerance for grouping Bohr frequencies. Defaults to
        ``1e-9`` times the spectral range.
    """

    beta: float
    couplings: tuple
    profile: str | Callable = "flat"
    gamma0: float = 1.0
    cutoff: float | None = None
    kms: bool = True
    bin_tol: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(np.asarray(a, dtype=complex) for a in self.couplings))
        if not self.couplings:
            raise ValueError("at least one coupling operator is required")
        if isinstance(self.profile, str) and self.profile not in _PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}")
        if not self.kms and not callable(self.profile):
            raise ValueError("kms=False needs a callable profile")

    def rate(self, omega: float) -> float:
        """Rate for a transition in which the system loses energy ``omega``."""
        prof = self.profile if callable(self.profile) else (
            lambda w: _PROFILES[self.profile](w, self.gamma0, self.cutoff))
        if not self.kms:
            return float(prof(omega))
        if omega >= 0:
            return float(prof(omega))
        return float(np.exp(self.beta * omega) * prof(-omega))

    def lifted(self, left: int = 1, right: int = 1) -> "ThermalBathSpec":
        """Same bath with couplings embedded as ``1_left kron A kron 1_right``."""
        ops = tuple(np.kron(np.kron(np.eye(left), a), np.eye(right)) for a in self.couplings)
        return ThermalBathSpec(self.beta, ops, self.profile, self.gamma0, self.cutoff, self.kms, self.bin_tol)

    def scaled(self, factor: float) -> "ThermalBathSpec":
        ops = tuple(np.sqrt(factor) * a for a in self.couplings)
        return ThermalBathSpec(self.beta, ops, self.profile, self.gamma0, self.cutoff, self.kms, self.bin_tol)


def _group(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Cluster sorted values into runs whose neighbours differ by at most ``tol``."""
    order = np.argsort(values, kind="stable")
    groups, cur = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if values[b] - values[a] <= tol:
            cur.append(b)
        else:
            groups.append(np.array(cur))
            cur = [b]
    groups.append(np.array(cur))
    return groups


def thermal_jumps(H: np.ndarray, bath: ThermalBathSpec) -> list[JumpTerm]:
    """Secular jump operators ``A_k(omega)`` with their rates.

    ``A_k(omega)`` collects the matrix elements of ``A_k`` between levels
    ``e'`` and ``e`` with ``e' - e = omega``, so it lowers the energy by
    ``omega``.
    """
    if not is_hermitian(H):
        raise ValueError("Hamiltonian must be Hermitian")
    for a in bath.couplings:
        if a.shape != H.shape:
            raise ValueError(f"coupling shape {a.shape} does not match Hamiltonian {H.shape}")
    w, v = np.linalg.eigh(0.5 * (H + dagger(H)))
    span = float(w[-1] - w[0])
    tol = bath.bin_tol if bath.bin_tol is not None else 1e-9 * max(span, 1.0)
    levels = _group(w, tol)
    energies = np.array([w[g].mean() for g in levels])
    projs = [v[:, g] @ dagger(v[:, g]) for g in levels]
    # Bohr frequencies, binned
    pairs = [(i, j, energies[j] - energies[i]) for i in range(len(levels)) for j in range(len(levels))]
    freqs = np.array([p[2] for p in pairs])
    bins = _group(freqs, tol)
    merged = [freqs[b] for b in bins if np.ptp(freqs[b]) > 1e3 * np.finfo(float).eps * max(span, 1.0)]
    if merged:
        warnings.warn(f"distinct Bohr frequencies merged into one bin: {[list(np.round(m, 14)) for m in merged]}",
                      RuntimeWarning, stacklevel=2)
    out = []
    for b in bins:
        omega = float(freqs[b].mean())
        rate = bath.rate(omega)
        if rate == 0.0:
            continue
        for a in bath.couplings:
            op = sum(projs[pairs[k][0]] @ a @ projs[pairs[k][1]] for k in b)
            if np.max(np.abs(op)) > 1e-14:
                out.append(JumpTerm(op, rate, omega))
    return out


def thermal_generator(H: np.ndarray, bath: ThermalBathSpec, hamiltonian: bool = True) -> np.ndarray:
    """Secular thermal generator for ``H``; includes ``-i[H,.]`` unless ``hamiltonian=False``.

    The Lamb shift is neglected.
    """
    L = sum((j.rate * dissipator(j.operator) for j in thermal_jumps(H, bath)),
            np.zeros((H.shape[0] ** 2,) * 2, dtype=complex))
    return L + hamiltonian_superop(H) if hamiltonian else L


def ldb_audit(bath: ThermalBathSpec, H: np.ndarray) -> float:
    """Largest relative violation of ``gamma(-w) = exp(-beta w) gamma(w)`` over Bohr frequencies of ``H``."""
    w = np.linalg.eigvalsh(H)
    freqs = np.unique(np.round(np.abs(w[:, None] - w[None, :]).ravel(), 12))
    worst = 0.0
    for om in freqs[freqs > 0]:
        down, up = bath.rate(om), bath.rate(-om)
        ref = max(abs(up), abs(np.exp(-bath.beta * om) * down), 1e-300)
        worst = max(worst, abs(up - np.exp(-bath.beta * om) * down) / ref)
    return worst


def heat_rate(H: np.ndarray, L_diss: np.ndarray, rho: np.ndarray) -> float:
    """``tr(H L rho)``: energy flowing in from the reservoir per unit time."""
    return float(np.real(np.vdot(vec(dagger(H)), L_diss @ vec(rho))))


def spohn_functional(L: np.ndarray, rho: np.ndarray, rho_bar: np.ndarray) -> float:
    """``-tr[(L rho)(ln rho - ln rho_bar)]``; non-negative when ``L rho_bar = 0``."""
    d = rho.shape[0]
    lr = unvec(L @ vec(rho), d)
    diff = hermitian_log(rho) - hermitian_log(rho_bar)
    return float(-np.real(np.trace(lr @ diff)))


# --- propagation -------------------------------------------------------------

def _rk4(f, y, t0, t1, n):
    h = (t1 - t0) / n
    t = t0
    for _ in range(n):
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def propagate(L, rho0: np.ndarray, t0: float, t1: float, dt_max: float = 1e-2,
              richardson_tol: float = 1e-8) -> np.ndarray:
    """Evolve ``rho0`` under ``d rho/dt = L(t) rho`` from ``t0`` to ``t1``.

    A constant matrix ``L`` is exponentiated exactly. A callable ``t -> L`` is
    integrated with fixed-step RK4 (step at most ``dt_max``) and checked
    against a run with half the step; a disagreement above
    ``richardson_tol`` raises a warning.

    Raises
    ------
    IntegrationError
        If the trace drifts by more than 1e-7 before renormalisation.
    """
    d = rho0.shape[0]
    v0 = vec(rho0).astype(complex)
    if t1 == t0:
        return rho0.copy()
    if not callable(L):
        out = unvec(expm(L * (t1 - t0)) @ v0, d)
    else:
        n = max(1, int(np.ceil(abs(t1 - t0) / dt_max)))
        f = lambda t, y: L(t) @ y
        coarse = _rk4(f, v0, t0, t1, n)
        fine = _rk4(f, v0, t0, t1, 2 * n)
        err = np.max(np.abs(fine - coarse)) / 15
        if err > richardson_tol:
            warnings.warn(f"RK4 step-halving error estimate {err:.2e} exceeds {richardson_tol:.1e}",
                          RuntimeWarning, stacklevel=2)
        out = unvec(fine, d)
    drift = abs(np.trace(out) - np.trace(rho0))
    if drift > 1e-7:
        raise IntegrationError(f"trace drift {drift:.2e}")
    return out


def steady_state(L: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Unique normalised null vector of ``L``.

    Raises
    ------
    NonUniqueSteadyStateError
        If the null space has dimension above one.
    """
    n = L.shape[0]
    d = int(round(np.sqrt(n)))
    s_scale = max(1.0, np.max(np.abs(L)))
    tol = 1e-10 * s_scale * n if tol is None else tol
    _, s, vh = svd(L, lapack_driver="gesdd")
    null = np.sum(s <= tol)
    if null > 1:
        raise NonUniqueSteadyStateError(f"null space of dimension {null}")
    if null == 0 and s[-1] > 1e-6 * s_scale:
        raise ValueError(f"generator has no stationary state (smallest singular value {s[-1]:.2e})")
    rho = unvec(vh[-1].conj(), d)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + dagger(rho))
