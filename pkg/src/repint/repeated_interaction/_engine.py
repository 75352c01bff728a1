"""Propagators for one constant-structure time segment.

A segment evolves a state on some space under ``H(t)`` and, optionally, a
weakly coupled thermal bath. Constant Hamiltonians are handled exactly;
callables are integrated with fixed-step RK4 and work and heat rates are
integrated with Simpson's rule on the same grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import expm
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..generators import (IntegrationError, ThermalBathSpec, dissipator, hamiltonian_superop,
                          heat_rate, thermal_jumps, unvec, vec)
from ..operators import dagger, expectation, unitary_from

RICHARDSON_TOL = 1e-9

# bath propagators shared by segments with identical data
_LOCAL_CACHE: dict = {}


def at(op, t: float) -> np.ndarray:
    return op(t) if callable(op) else op


def derivative(op, t: float) -> np.ndarray:
    """Time derivative of an operator family (zero for constants)."""
    if not callable(op):
        return np.zeros_like(op)
    d = getattr(op, "derivative", None)
    if d is not None:
        return d(t)
    h = 1e-5 * max(1.0, abs(t))
    return (op(t + h) - op(t - h)) / (2 * h)


def _steps(span: float, dt_max: float) -> int:
    n = max(2, int(np.ceil(span / dt_max)))
    return n + (n % 2)


def _rk4_grid(f, y0, t0, t1, n):
    """RK4 returning every grid state."""
    h = (t1 - t0) / n
    ys = [y0]
    y, t = y0, t0
    for _ in range(n):
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (len(ys)) * h
        ys.append(y)
    return np.linspace(t0, t1, n + 1), ys


def _check_trace(rho0, rho1):
    drift = abs(np.trace(rho1) - np.trace(rho0))
    if drift > 1e-7:
        raise IntegrationError(f"trace drift {drift:.2e}")


@dataclass
class Segment:
    """Evolution over ``[t0, t1)`` under ``H(t)`` with an optional bath.

    ``bath_couplings`` are already embedded in the segment space. If
    ``frozen_H`` is set, thermal jumps are built from it instead of ``H``;
    this lets a bath that only sees a subsystem ignore the rest.
    """

    H: np.ndarray | Callable
    t0: float
    t1: float
    bath: ThermalBathSpec | None = None
    jump_builder: Callable | None = None
    dt_max: float = 1e-3
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def span(self) -> float:
        return self.t1 - self.t0

    @property
    def constant(self) -> bool:
        return not callable(self.H)

    def _jumps(self, t):
        if self.jump_builder is not None:
            return self.jump_builder(t)
        return thermal_jumps(at(self.H, t), self.bath)

    def _dissipator(self, t):
        d = at(self.H, t).shape[0]
        L = np.zeros((d * d, d * d), dtype=complex)
        for j in self._jumps(t):
            L += j.rate * dissipator(j.operator)
        return L

    @property
    def open(self) -> bool:
        return self.bath is not None or self.jump_builder is not None

    # constant segments -----------------------------------------------------
    def _unitary(self):
        if "U" not in self._cache:
            self._cache["U"] = unitary_from(self.H, self.span)
        return self._cache["U"]

    def _generators(self):
        if "L" not in self._cache:
            Ld = self._dissipator(self.t0)
            self._cache["Ld"] = Ld
            self._cache["L"] = Ld + hamiltonian_superop(self.H)
        return self._cache["L"], self._cache["Ld"]

    def _propagator(self):
        if "P" not in self._cache:
            L, _ = self._generators()
            self._cache["P"] = expm(L * self.span)
        return self._cache["P"]

    def superoperator(self) -> np.ndarray:
        """Propagator as a matrix on column-stacked states (constant segments only)."""
        if not self.constant:
            raise ValueError("superoperator of a time-dependent segment is not cached")
        if self.open:
            return self._propagator()
        U = self._unitary()
        return np.kron(U.conj(), U)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Evolved state only."""
        if self.span == 0:
            return rho
        if self.constant:
            if self.open:
                return unvec(self._propagator() @ vec(rho), rho.shape[0])
            U = self._unitary()
            return U @ rho @ dagger(U)
        return self.run(rho)[0]

    def run(self, rho: np.ndarray) -> tuple[np.ndarray, float, float]:
        """Return ``(state, heat from the bath, work from explicit time dependence)``."""
        if self.span == 0:
            return rho, 0.0, 0.0
        if self.constant:
            if not self.open:
                U = self._unitary()
                return U @ rho @ dagger(U), 0.0, 0.0
            L, Ld = self._generators()
            n = L.shape[0]
            aug = np.zeros((n + 1, n + 1), dtype=complex)
            aug[:n, :n] = L
            aug[:n, n] = vec(rho)
            # the last column of exp(aug t) is the time integral of the state
            E = expm(aug * self.span)
            integral = unvec(E[:n, n], rho.shape[0])
            final = unvec(E[:n, :n] @ vec(rho), rho.shape[0])
            _check_trace(rho, final)
            return final, heat_rate(self.H, Ld, integral), 0.0
        return self._run_td(rho)

    def _run_td(self, rho):
        d = rho.shape[0]
        n = _steps(self.span, self.dt_max)
        if self.open:
            cache = {}

            def gens(t):
                if t not in cache:
                    Ld = self._dissipator(t)
                    cache[t] = (Ld + hamiltonian_superop(at(self.H, t)), Ld)
                return cache[t]

            f = lambda t, y: gens(t)[0] @ y
            y0 = vec(rho).astype(complex)
        else:
            f = lambda t, y: -1j * (at(self.H, t) @ y - y @ at(self.H, t))
            y0 = rho.astype(complex)

        ts, ys = _rk4_grid(f, y0, self.t0, self.t1, n)
        _, ys_half = _rk4_grid(f, y0, self.t0, self.t1, n // 2)
        err = np.max(np.abs(ys[-1] - ys_half[-1])) / 15
        if err > RICHARDSON_TOL:
            warnings.warn(f"RK4 step-halving error estimate {err:.2e} exceeds {RICHARDSON_TOL:.0e}; "
                          "reduce dt_max", RuntimeWarning, stacklevel=3)
        states = [unvec(y, d) if self.open else y for y in ys]
        w_rate = [expectation(derivative(self.H, t), r) for t, r in zip(ts, states)]
        work = float(simpson(w_rate, x=ts))
        heat = 0.0
        if self.open:
            q_rate = [heat_rate(at(self.H, t), gens(t)[1], r) for t, r in zip(ts, states)]
            heat = float(simpson(q_rate, x=ts))
        _check_trace(rho, states[-1])
        return states[-1], heat, work


def _flow_and_integral(L, t):
    """``exp(L t)`` and ``int_0^t exp(L s) ds``."""
    n = L.shape[0]
    aug = np.zeros((2 * n, 2 * n), dtype=complex)
    aug[:n, :n] = L
    aug[:n, n:] = np.eye(n)
    E = expm(aug * t)
    return E[:n, :n], E[:n, n:]


class LocalSegment:
    """Bath on the first factor of a bipartite state; the second factor evolves freely.

    Equivalent to a :class:`Segment` with lifted jump operators but
    propagates only the first factor's superoperator.
    """

    def __init__(self, H_S, H_U, t0, t1, bath: ThermalBathSpec):
        self.H_S, self.H_U, self.t0, self.t1, self.bath = H_S, H_U, t0, t1, bath
        self.d_S, self.d_U = H_S.shape[0], H_U.shape[0]
        self._cache = {}

    @property
    def span(self):
        return self.t1 - self.t0

    def _parts(self):
        if "P" not in self._cache:
            key = (self.H_S.tobytes(), self.H_S.shape, self.H_U.tobytes(), round(self.span, 12), id(self.bath))
            hit = _LOCAL_CACHE.get(key)
            if hit is None or hit[0] is not self.bath:
                hit = (self.bath, self._build())
                if len(_LOCAL_CACHE) >= 16:
                    _LOCAL_CACHE.pop(next(iter(_LOCAL_CACHE)))
                _LOCAL_CACHE[key] = hit
            self._cache.update(hit[1])
        return self._cache

    def _build(self):
        Ld = sum((j.rate * dissipator(j.operator) for j in thermal_jumps(self.H_S, self.bath)),
                 np.zeros((self.d_S ** 2,) * 2, dtype=complex))
        L = Ld + hamiltonian_superop(self.H_S)
        t = self.span
        n = L.shape[0]
        P = np.zeros((n, n), dtype=complex)
        Int = np.zeros((n, n), dtype=complex)
        # generators often split into independent blocks (e.g. coherence orders)
        _, labels = connected_components(csr_matrix(np.abs(L) > 0), directed=False)
        for lab in np.unique(labels):
            idx = np.flatnonzero(labels == lab)
            Pb, Ib = _flow_and_integral(L[np.ix_(idx, idx)], t)
            P[np.ix_(idx, idx)] = Pb
            Int[np.ix_(idx, idx)] = Ib
        return dict(P=P, Int=Int, Ld=Ld, W=unitary_from(self.H_U, t))

    def _on_system(self, M, rho):
        dS, dU = self.d_S, self.d_U
        t = rho.reshape(dS, dU, dS, dU).transpose(2, 0, 1, 3).reshape(dS * dS, dU * dU)
        t = (M @ t).reshape(dS, dS, dU, dU).transpose(1, 2, 0, 3)
        return t.reshape(dS * dU, dS * dU)

    def superoperator_S(self):
        return self._parts()["P"]

    def apply(self, rho):
        if self.span == 0:
            return rho
        c = self._parts()
        Wf = np.kron(np.eye(self.d_S), c["W"])
        return Wf @ self._on_system(c["P"], rho) @ dagger(Wf)

    def run(self, rho):
        if self.span == 0:
            return rho, 0.0, 0.0
        c = self._parts()
        dS, dU = self.d_S, self.d_U
        rho_S = np.einsum("iuju->ij", rho.reshape(dS, dU, dS, dU))
        integral = unvec(c["Int"] @ vec(rho_S), dS)
        out = self.apply(rho)
        _check_trace(rho, out)
        return out, heat_rate(self.H_S, c["Ld"], integral), 0.0
