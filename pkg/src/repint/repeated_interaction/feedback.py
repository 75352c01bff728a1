"""Measurement followed by outcome-conditioned feedback, with one memory unit per cycle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..generators import ThermalBathSpec
from ..operators import (dagger, density_matrix, expectation, is_hermitian, mutual_information,
                         partial_trace, projector, sigma_x, von_neumann_entropy)
from ._engine import Segment, at
from .interval import _sum_op


@dataclass(frozen=True)
class FeedbackSpec:
    """One measurement-feedback cycle.

    The memory ``U`` is read in its computational basis; outcome ``o``
    selects the system Hamiltonian ``feedback_hamiltonians[o]`` and scales
    the bath rates by ``rate_scales[o]``. The measurement is either the
    instantaneous unitary ``measurement`` (``t_ms = 0``) or the coupling
    ``V_ms`` acting for ``t_ms``. The bath, if any, acts on the system
    throughout.
    """

    H_S: np.ndarray
    rho_U: np.ndarray
    tau: float
    feedback_hamiltonians: Sequence | None = None
    H_fb: np.ndarray | None = None
    H_U: np.ndarray | None = None
    measurement: np.ndarray | None = None
    V_ms: np.ndarray | Callable | None = None
    t_ms: float = 0.0
    bath: ThermalBathSpec | None = None
    rate_scales: Sequence[float] | None = None
    dt_max: float = 1e-3

    def __post_init__(self):
        rho_U = density_matrix(self.rho_U)
        object.__setattr__(self, "rho_U", rho_U)
        d_U = rho_U.shape[0]
        d_S = self.H_S.shape[0]
        if self.H_U is None:
            object.__setattr__(self, "H_U", np.zeros((d_U, d_U), dtype=complex))
        if (self.measurement is None) == (self.V_ms is None):
            raise ValueError("give exactly one of an instantaneous measurement unitary or V_ms")
        if self.measurement is not None and self.t_ms != 0:
            raise ValueError("an instantaneous measurement needs t_ms = 0")
        if not 0 <= self.t_ms <= self.tau:
            raise ValueError("need 0 <= t_ms <= tau")
        if (self.feedback_hamiltonians is None) == (self.H_fb is None):
            raise ValueError("give either per-outcome feedback Hamiltonians or H_fb")
        if self.H_fb is not None:
            blocks = _split_blocks(np.asarray(self.H_fb), d_S, d_U)
            object.__setattr__(self, "feedback_hamiltonians", tuple(blocks))
            object.__setattr__(self, "H_fb", None)
        if len(self.feedback_hamiltonians) != d_U:
            raise ValueError("one feedback Hamiltonian per memory state is required")
        if self.rate_scales is not None and len(self.rate_scales) != d_U:
            raise ValueError("one rate scale per memory state is required")

    @property
    def dims(self):
        return (self.H_S.shape[0], self.rho_U.shape[0])


class FeedbackHamiltonianError(ValueError):
    """Feedback Hamiltonian mixes memory states."""


def _split_blocks(H: np.ndarray, d_S: int, d_U: int) -> list[np.ndarray]:
    t = H.reshape(d_S, d_U, d_S, d_U)
    for o in range(d_U):
        for p in range(d_U):
            if o != p and np.max(np.abs(t[:, o, :, p])) > 1e-12:
                raise FeedbackHamiltonianError(
                    f"H_fb couples memory states {o} and {p}; it must be block diagonal")
    return [t[:, o, :, o].copy() for o in range(d_U)]


@dataclass(frozen=True)
class StageLedger:
    dE_S: float
    dE_U: float
    W: float
    Q: float
    dS_S: float
    dS_U: float
    I_start: float
    I_end: float
    dF_S: float
    Sigma: float


@dataclass(frozen=True)
class FeedbackReport:
    measurement: StageLedger
    feedback: StageLedger
    beta: float
    rho_S: np.ndarray
    rho_SU: np.ndarray

    @property
    def I_ms(self) -> float:
        return self.measurement.I_end

    @property
    def measurement_bound_slack(self) -> float:
        """``beta W_ms - (beta dF_S + beta dE_U - dS_U + I_ms)``."""
        m, b = self.measurement, self.beta
        return b * m.W - (b * m.dF_S + b * m.dE_U - m.dS_U + m.I_end)

    @property
    def feedback_bound_slack(self) -> float:
        """Slack of ``-beta W_fb <= -beta dF_S_fb - beta dE_U_fb + dS_U_fb + I_ms``."""
        f, b = self.feedback, self.beta
        return (-b * f.dF_S - b * f.dE_U + f.dS_U + self.I_ms) + b * f.W

    @property
    def steady_bound_slack(self) -> float:
        """Slack of ``-beta W_fb <= beta dF_S_ms - beta dE_U_fb + dS_U_fb + I_ms``.

        Valid when the cycle returns the system to its initial state.
        """
        f, b = self.feedback, self.beta
        return (b * self.measurement.dF_S - b * f.dE_U + f.dS_U + self.I_ms) + b * f.W

    @property
    def information_bound_slack(self) -> float:
        """``I_ms + beta W_fb``; non-negative at steady state for non-disturbing classical readout."""
        return self.I_ms + self.beta * self.feedback.W

    @property
    def total_work_slack(self) -> float:
        """``beta (W_ms + W_fb) + dS_U`` over the whole cycle."""
        return self.beta * (self.measurement.W + self.feedback.W) + self.measurement.dS_U + self.feedback.dS_U

    @property
    def first_law_residuals(self) -> tuple[float, float]:
        m, f = self.measurement, self.feedback
        return (m.dE_S + m.dE_U - m.W - m.Q, f.dE_S + f.dE_U - f.W - f.Q)


class _FeedbackPlan:
    def __init__(self, spec: FeedbackSpec):
        self.spec = spec
        d_S, d_U = spec.dims
        self.d_S, self.d_U = d_S, d_U
        eye_S, eye_U = np.eye(d_S), np.eye(d_U)
        self.H_bare = np.kron(spec.H_S, eye_U) + np.kron(eye_S, spec.H_U)
        proj = [projector(d_U, o) for o in range(d_U)]
        fb_parts = []
        for o, Ho in enumerate(spec.feedback_hamiltonians):
            if callable(Ho):
                fb_parts.append(lambda t, Ho=Ho, P=proj[o]: np.kron(Ho(t), P))
            else:
                if not is_hermitian(Ho):
                    raise ValueError(f"feedback Hamiltonian {o} is not Hermitian")
                fb_parts.append(np.kron(Ho, proj[o]))
        self.H_fb = _sum_op(*fb_parts, np.kron(eye_S, spec.H_U))

        self.ms_segment = None
        if spec.V_ms is not None:
            bath_ms = spec.bath.lifted(1, d_U) if spec.bath is not None else None
            self.ms_segment = Segment(_sum_op(self.H_bare, spec.V_ms), 0.0, spec.t_ms, bath=bath_ms,
                                      dt_max=spec.dt_max)
        bath_fb = None
        if spec.bath is not None:
            scales = spec.rate_scales or [1.0] * d_U
            ops = tuple(np.sqrt(scales[o]) * np.kron(a, proj[o])
                        for o in range(d_U) for a in spec.bath.couplings)
            b = spec.bath
            bath_fb = ThermalBathSpec(b.beta, ops, b.profile, b.gamma0, b.cutoff, b.kms, b.bin_tol)
        self.fb_segment = Segment(self.H_fb, spec.t_ms, spec.tau, bath=bath_fb, dt_max=spec.dt_max)

    def measure(self, rho, record):
        s = self.spec
        if s.measurement is not None:
            U = np.asarray(s.measurement)
            out = U @ rho @ dagger(U)
            w = expectation(self.H_bare, out) - expectation(self.H_bare, rho) if record else 0.0
            return out, 0.0, w
        if not record:
            return self.ms_segment.apply(rho), 0.0, 0.0
        w_on = expectation(at(s.V_ms, 0.0), rho)
        out, q, w = self.ms_segment.run(rho)
        w_off = -expectation(at(s.V_ms, s.t_ms), out)
        return out, q, w + w_on + w_off

    def feed(self, rho, record):
        s = self.spec
        if not record:
            return self.fb_segment.apply(rho), 0.0, 0.0
        w_on = expectation(at(self.H_fb, s.t_ms) - self.H_bare, rho)
        out, q, w = self.fb_segment.run(rho)
        w_off = expectation(self.H_bare - at(self.H_fb, s.tau), out)
        return out, q, w + w_on + w_off

    def superoperator(self):
        d = self.d_S
        M = np.zeros((d * d, d * d), dtype=complex)
        for j in range(d):
            for i in range(d):
                E = np.zeros((d, d), dtype=complex)
                E[i, j] = 1.0
                rho = np.kron(E, self.spec.rho_U)
                rho, _, _ = self.measure(rho, False)
                rho, _, _ = self.feed(rho, False)
                M[:, j * d + i] = partial_trace(rho, (d, self.d_U), 0).reshape(-1, order="F")
        return M


def _stage(rho0, rho1, dims, H_S, H_U, W, Q, beta) -> StageLedger:
    s0, s1 = partial_trace(rho0, dims, 0), partial_trace(rho1, dims, 0)
    u0, u1 = partial_trace(rho0, dims, 1), partial_trace(rho1, dims, 1)
    dE_S = expectation(H_S, s1 - s0)
    dS_S = von_neumann_entropy(s1) - von_neumann_entropy(s0)
    dS_U = von_neumann_entropy(u1) - von_neumann_entropy(u0)
    I0, I1 = mutual_information(rho0, dims, 0), mutual_information(rho1, dims, 0)
    T = 1 / beta if beta else math.inf
    bq = beta * Q if Q != 0 else 0.0
    return StageLedger(dE_S=dE_S, dE_U=expectation(H_U, u1 - u0), W=W, Q=Q, dS_S=dS_S, dS_U=dS_U,
                       I_start=I0, I_end=I1, dF_S=dE_S - T * dS_S,
                       Sigma=dS_S + dS_U - (I1 - I0) - bq)


def feedback_protocol(rho_S: np.ndarray, spec: FeedbackSpec) -> FeedbackReport:
    """Run one measurement-feedback cycle and book both stages."""
    rho_S = density_matrix(rho_S)
    plan = _FeedbackPlan(spec)
    dims = spec.dims
    beta = spec.bath.beta if spec.bath is not None else math.nan
    rho0 = np.kron(rho_S, spec.rho_U)
    rho_ms, q_ms, w_ms = plan.measure(rho0, True)
    rho_fb, q_fb, w_fb = plan.feed(rho_ms, True)
    rho_fb = 0.5 * (rho_fb + dagger(rho_fb))
    b = beta if math.isfinite(beta) else 0.0
    return FeedbackReport(
        measurement=_stage(rho0, rho_ms, dims, spec.H_S, spec.H_U, w_ms, q_ms, b),
        feedback=_stage(rho_ms, rho_fb, dims, spec.H_S, spec.H_U, w_fb, q_fb, b),
        beta=beta,
        rho_S=partial_trace(rho_fb, dims, 0),
        rho_SU=rho_fb,
    )


def feedback_superoperator(spec: FeedbackSpec) -> np.ndarray:
    """Reduced system map of one cycle, for steady-state searches."""
    return _FeedbackPlan(spec).superoperator()


def noisy_readout_feedback(H_S, feedback_hamiltonians, eps: float, beta: float, tau: float,
                           gamma0: float = 1.0, coupling: np.ndarray | None = None) -> FeedbackSpec:
    """Qubit memory copying the system's level with flip probability ``eps``.

    The readout is ``|0><0| x 1 + |1><1| x sigma_x`` on system x memory; the
    system is a qubit and the bath couples through ``coupling`` (default
    ``sigma_x``). For diagonal ``H_S`` the readout leaves the system state
    and energy untouched.
    """
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    H_S = np.asarray(H_S, dtype=complex)
    if H_S.shape != (2, 2):
        raise ValueError("the readout acts on a qubit system")
    cnot = np.kron(projector(2, 0), np.eye(2)) + np.kron(projector(2, 1), sigma_x())
    A = sigma_x() if coupling is None else coupling
    return FeedbackSpec(H_S=H_S, rho_U=np.diag([1 - eps, eps]), tau=tau,
                        feedback_hamiltonians=tuple(feedback_hamiltonians), measurement=cnot,
                        bath=ThermalBathSpec(beta, (A,), gamma0=gamma0))
