"""One interaction interval between a system and a fresh unit."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Union

import numpy as np

from ..generators import JumpTerm, ThermalBathSpec, thermal_jumps
from ..operators import (dagger, density_matrix, expectation, gibbs_state, is_hermitian,
                         mutual_information, partial_trace, permute_subsystems, relative_entropy,
                         von_neumann_entropy)
from ._engine import LocalSegment, Segment, at

MAX_RESERVOIR_DIM = 32
MAX_COMPOSITE_DIM = 128

OperatorLike = Union[np.ndarray, Callable[[float], np.ndarray]]


class ResourceLimitError(ValueError):
    """Requested Hilbert space exceeds the configured caps."""


@dataclass(frozen=True)
class UnitStreamSpec:
    """A stream of identically prepared units.

    ``V_SU`` is switched on at ``t = 0`` and off at ``tau_prime``; it may be a
    constant matrix or a callable of time. ``kick`` is an optional unitary on
    the system and unit applied instantaneously at ``t = 0``; its energy
    change counts as switching work.
    """

    H_U: np.ndarray
    rho_U: np.ndarray
    tau: float
    tau_prime: float | None = None
    V_SU: OperatorLike | None = None
    kick: np.ndarray | None = None
    dt_max: float = 1e-3

    def __post_init__(self):
        tp = self.tau if self.tau_prime is None else self.tau_prime
        object.__setattr__(self, "tau_prime", float(tp))
        if not (0 <= tp <= self.tau):
            raise ValueError(f"need 0 <= tau_prime <= tau, got tau_prime={tp}, tau={self.tau}")
        object.__setattr__(self, "rho_U", density_matrix(self.rho_U))
        if not is_hermitian(self.H_U):
            raise ValueError("H_U must be Hermitian")
        if self.kick is not None:
            k = np.asarray(self.kick)
            if not np.allclose(k @ dagger(k), np.eye(k.shape[0]), atol=1e-10):
                raise ValueError("kick must be unitary")

    @property
    def d_U(self) -> int:
        return self.rho_U.shape[0]


@dataclass(frozen=True)
class NoReservoir:
    """Isolated system and unit. ``beta`` only sets the free-energy temperature."""

    beta: float | None = None


@dataclass(frozen=True)
class FiniteReservoir:
    """Explicit reservoir in a Gibbs state, coupled through ``H_XR``.

    ``H_XR`` acts on system, unit and reservoir (in that order) or only on
    system and reservoir, in which case it is lifted. It is switched on for
    the whole interval; its boundary energy is booked as work.
    """

    H_R: np.ndarray
    H_XR: np.ndarray
    beta: float
    reset: bool = True


@dataclass(frozen=True)
class WeakReservoir:
    """Weakly coupled thermal bath attached to the system.

    With ``during_interaction=False`` the bath only acts after ``tau_prime``.
    """

    bath: ThermalBathSpec
    during_interaction: bool = True

    @property
    def beta(self) -> float:
        return self.bath.beta


ReservoirMode = Union[NoReservoir, FiniteReservoir, WeakReservoir]


@dataclass(frozen=True)
class ThermoLedger:
    """Energy and entropy balance of one interval.

    Energies use the bare ``H_S`` and ``H_U``; ``W`` is ``W_X + W_sw``.
    ``Sigma`` includes the final system-unit correlation, ``Sigma_S`` does
    not (``Sigma_S = Sigma + I_SU``).
    """

    dE_S: float
    dE_U: float
    W_X: float
    W_sw: float
    W: float
    Q: float
    dS_S: float
    dS_U: float
    I_SU: float
    Sigma: float
    Sigma_S: float
    dF_S: float
    dF_U: float
    beta: float
    first_law_residual: float

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list[float]:
        return [getattr(self, k) for k in self.header()]

    def as_dict(self) -> dict:
        return asdict(self)


def write_ledger_csv(ledgers, path_or_buffer=None, index_name: str = "interval") -> str:
    """Write ledgers as CSV with a fixed header. Returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([index_name] + ThermoLedger.header())
    for k, led in enumerate(ledgers):
        w.writerow([k] + [repr(float(x)) for x in led.row()])
    text = buf.getvalue()
    if path_or_buffer is not None:
        if hasattr(path_or_buffer, "write"):
            path_or_buffer.write(text)
        else:
            with open(path_or_buffer, "w", newline="") as fh:
                fh.write(text)
    return text


@dataclass
class IntervalState:
    """States at the end of an interval."""

    rho_S: np.ndarray
    rho_U: np.ndarray
    rho_SU: np.ndarray
    rho_R: np.ndarray | None = None
    rho_SR: np.ndarray | None = None
    extras: dict = field(default_factory=dict)


def build_ledger(*, dE_S, dE_U, W_X, W_sw, Q, dS_S, dS_U, I_SU, beta) -> ThermoLedger:
    """Assemble a ledger from primitive differences."""
    W = W_X + W_sw
    if beta is None or (not math.isfinite(beta)):
        beta_val = math.nan if beta is None else float(beta)
        bq = 0.0 if Q == 0 else math.nan
        T = math.nan
    else:
        beta_val = float(beta)
        bq = beta_val * Q
        T = 1.0 / beta_val if beta_val != 0 else math.inf
    Sigma = dS_S + dS_U - I_SU - bq
    return ThermoLedger(
        dE_S=dE_S, dE_U=dE_U, W_X=W_X, W_sw=W_sw, W=W, Q=Q,
        dS_S=dS_S, dS_U=dS_U, I_SU=I_SU, Sigma=Sigma, Sigma_S=Sigma + I_SU,
        dF_S=dE_S - T * dS_S, dF_U=dE_U - T * dS_U, beta=beta_val,
        first_law_residual=dE_S + dE_U - W - Q,
    )


def switching_work(V0: np.ndarray, rho_start: np.ndarray, V1: np.ndarray, rho_end: np.ndarray) -> float:
    """``tr(V0 rho_start) - tr(V1 rho_end)``: work to switch a coupling on and back off."""
    return expectation(V0, rho_start) - expectation(V1, rho_end)


def exact_two_system_sigma(rho_XR: np.ndarray, dims_XR: tuple[int, int], rho_X_initial: np.ndarray,
                           H_R: np.ndarray, beta: float) -> dict:
    """Entropy production of a system that exchanged energy with a finite reservoir.

    The reservoir is assumed to have started in its Gibbs state and the joint
    evolution to have been unitary. Returns the entropy production computed
    as ``dS_X - beta Q`` together with its decomposition into the
    reservoir's distance from equilibrium and the system-reservoir
    correlation.
    """
    rho_X = partial_trace(rho_XR, dims_XR, 0)
    rho_R = partial_trace(rho_XR, dims_XR, 1)
    rho_b = gibbs_state(H_R, beta)
    Q = -expectation(H_R, rho_R - rho_b)
    dS_X = von_neumann_entropy(rho_X) - von_neumann_entropy(rho_X_initial)
    D_R = relative_entropy(rho_R, rho_b)
    I_XR = mutual_information(rho_XR, dims_XR, 0)
    dS_R = von_neumann_entropy(rho_R) - von_neumann_entropy(rho_b)
    sigma = dS_X - beta * Q
    return {
        "Sigma": sigma,
        "D_R": D_R,
        "I_XR": I_XR,
        "Q": Q,
        "dS_X": dS_X,
        "dS_R": dS_R,
        "decomposition_residual": sigma - (D_R + I_XR),
        # T D = -Q - T dS_R
        "reservoir_free_energy_residual": D_R / beta - (-Q - dS_R / beta),
        "relative_entropy_form": relative_entropy(rho_XR, np.kron(rho_X, rho_b)),
    }


# --- interval propagation ---------------------------------------------------

def _check_shapes(rho_S, H_S, stream):
    d_S = rho_S.shape[0]
    H0 = at(H_S, 0.0)
    if H0.shape != (d_S, d_S):
        raise ValueError(f"H_S shape {H0.shape} does not match system dimension {d_S}")
    d = d_S * stream.d_U
    if stream.V_SU is not None and at(stream.V_SU, 0.0).shape != (d, d):
        raise ValueError(f"V_SU must act on the {d}-dimensional system-unit space")
    if stream.kick is not None and np.shape(stream.kick) != (d, d):
        raise ValueError(f"kick must act on the {d}-dimensional system-unit space")


def _sum_op(*parts):
    """Sum of constant and callable operators, returning a callable if any part is."""
    if any(callable(p) for p in parts):
        def f(t):
            return sum(at(p, t) for p in parts)
        return f
    return sum(parts)


class _Plan:
    """Propagators for one interval, reusable across input states."""

    def __init__(self, H_S, stream: UnitStreamSpec, reservoir: ReservoirMode, d_S: int):
        self.H_S, self.stream, self.res, self.d_S = H_S, stream, reservoir, d_S
        d_U = stream.d_U
        self.d_U = d_U
        self.d_X = d_S * d_U
        eye_U = np.eye(d_U)
        eye_S = np.eye(d_S)
        if callable(H_S):
            H_SU0 = lambda t: np.kron(H_S(t), eye_U)
        else:
            H_SU0 = np.kron(H_S, eye_U)
        self.H_bare_X = _sum_op(H_SU0, np.kron(eye_S, stream.H_U))
        V = stream.V_SU
        self.V = V if V is not None else np.zeros((self.d_X, self.d_X), dtype=complex)
        H_int = _sum_op(self.H_bare_X, self.V)
        tp, tau = stream.tau_prime, stream.tau

        if isinstance(reservoir, FiniteReservoir):
            d_R = reservoir.H_R.shape[0]
            if d_R > MAX_RESERVOIR_DIM:
                raise ResourceLimitError(f"reservoir dimension {d_R} exceeds cap {MAX_RESERVOIR_DIM}")
            if self.d_X * d_R > MAX_COMPOSITE_DIM:
                raise ResourceLimitError(
                    f"composite dimension {self.d_X * d_R} exceeds cap {MAX_COMPOSITE_DIM}")
            self.d_R = d_R
            H_XR = np.asarray(reservoir.H_XR, dtype=complex)
            if H_XR.shape == (d_S * d_R,) * 2:
                H_XR = permute_subsystems(np.kron(H_XR, eye_U), (d_S, d_R, d_U), [0, 2, 1])
            if H_XR.shape != (self.d_X * d_R,) * 2:
                raise ValueError("H_XR must act on S x R or S x U x R")
            self.H_XR = H_XR
            eye_R = np.eye(d_R)
            lift = lambda H: (lambda t: np.kron(at(H, t), eye_R)) if callable(H) else np.kron(H, eye_R)
            fixed = np.kron(np.eye(self.d_X), reservoir.H_R) + H_XR
            self.segments = [
                Segment(_sum_op(lift(H_int), fixed), 0.0, tp, dt_max=stream.dt_max),
                Segment(_sum_op(lift(self.H_bare_X), fixed), tp, tau, dt_max=stream.dt_max),
            ]
            self.rho_R0 = gibbs_state(reservoir.H_R, reservoir.beta)
        elif isinstance(reservoir, WeakReservoir):
            bath = reservoir.bath
            bath_X = bath.lifted(1, d_U)
            first = Segment(H_int, 0.0, tp, bath=bath_X if reservoir.during_interaction else None,
                            dt_max=stream.dt_max)

            def jumps_after(t):
                return [JumpTerm(np.kron(j.operator, eye_U), j.rate, j.omega)
                        for j in thermal_jumps(at(H_S, t), bath)]

            if callable(H_S):
                second = Segment(self.H_bare_X, tp, tau, jump_builder=jumps_after, dt_max=stream.dt_max)
            else:
                second = LocalSegment(H_S, stream.H_U, tp, tau, bath)
            self.segments = [first, second]
        elif reservoir is None or isinstance(reservoir, NoReservoir):
            self.segments = [
                Segment(H_int, 0.0, tp, dt_max=stream.dt_max),
                Segment(self.H_bare_X, tp, tau, dt_max=stream.dt_max),
            ]
        else:
            raise TypeError(f"unknown reservoir mode {reservoir!r}")

    @property
    def finite(self) -> bool:
        return isinstance(self.res, FiniteReservoir)

    def initial(self, rho_S, rho_SR=None):
        rho_SU = np.kron(rho_S, self.stream.rho_U)
        if not self.finite:
            return rho_SU
        if rho_SR is None:
            return np.kron(rho_SU, self.rho_R0)
        total = np.kron(rho_SR, self.stream.rho_U)
        return permute_subsystems(total, (self.d_S, self.d_R, self.d_U), [0, 2, 1])

    def _X_op(self, op):
        return np.kron(op, np.eye(self.d_R)) if self.finite else op

    def evolve(self, rho, record: bool):
        """Run the interval on a full initial state; returns final state and work/heat parts."""
        out = {"W_sw": 0.0, "W_X": 0.0, "Q": 0.0}
        s = self.stream
        if s.kick is not None:
            K = self._X_op(s.kick)
            H0 = self._X_op(at(self.H_bare_X, 0.0))
            after = K @ rho @ dagger(K)
            if record:
                out["W_sw"] += expectation(H0, after) - expectation(H0, rho)
            rho = after
        if self.finite and record:
            out["W_X"] += expectation(self.H_XR, rho)
        V0 = self._X_op(at(self.V, 0.0))
        if record:
            out["W_sw"] += expectation(V0, rho)
        seg_a, seg_b = self.segments
        if record:
            rho, q, w = seg_a.run(rho)
            out["Q"] += q
            out["W_X"] += w
            out["W_sw"] -= expectation(self._X_op(at(self.V, s.tau_prime)), rho)
            rho, q, w = seg_b.run(rho)
            out["Q"] += q
            out["W_X"] += w
        else:
            rho = seg_b.apply(seg_a.apply(rho))
        if self.finite and record:
            out["W_X"] -= expectation(self.H_XR, rho)
        return rho, out

    def superoperator(self) -> np.ndarray:
        """Matrix of the reduced system map (column-stacked)."""
        d = self.d_S
        M = np.zeros((d * d, d * d), dtype=complex)
        for j in range(d):
            for i in range(d):
                E = np.zeros((d, d), dtype=complex)
                E[i, j] = 1.0
                rho, _ = self.evolve(self.initial(E), record=False)
                keep = partial_trace(rho, self.dims, 0)
                M[:, j * d + i] = keep.reshape(-1, order="F")
        return M

    @property
    def dims(self):
        return (self.d_S, self.d_U, self.d_R) if self.finite else (self.d_S, self.d_U)


def run_interval(rho_S: np.ndarray, H_S: OperatorLike, stream: UnitStreamSpec,
                 reservoir: ReservoirMode | None = None, rho_SR: np.ndarray | None = None,
                 ) -> tuple[IntervalState, ThermoLedger]:
    """Evolve system and a fresh unit over one interval and book its thermodynamics.

    Parameters
    ----------
    rho_S:
        System state at the start of the interval.
    H_S:
        System Hamiltonian, constant or a callable of time.
    stream:
        Unit preparation, coupling and timing.
    reservoir:
        ``None``/:class:`NoReservoir`, :class:`FiniteReservoir` or
        :class:`WeakReservoir`.
    rho_SR:
        Joint system-reservoir state carried over from the previous interval
        when a finite reservoir is not reset. Overrides ``rho_S``.

    Returns
    -------
    state, ledger
    """
    reservoir = NoReservoir() if reservoir is None else reservoir
    if rho_SR is not None:
        if not (isinstance(reservoir, FiniteReservoir) and not reservoir.reset):
            raise ValueError("rho_SR is only meaningful for a finite reservoir without reset")
        d_R = reservoir.H_R.shape[0]
        rho_S = partial_trace(rho_SR, (rho_SR.shape[0] // d_R, d_R), 0)
    rho_S = density_matrix(rho_S)
    _check_shapes(rho_S, H_S, stream)
    plan = _Plan(H_S, stream, reservoir, rho_S.shape[0])
    rho0 = plan.initial(rho_S, rho_SR)
    rho1, parts = plan.evolve(rho0, record=True)
    rho1 = 0.5 * (rho1 + dagger(rho1))

    dims = plan.dims
    state = IntervalState(
        rho_S=partial_trace(rho1, dims, 0),
        rho_U=partial_trace(rho1, dims, 1),
        rho_SU=partial_trace(rho1, dims, [0, 1]),
    )
    Q = parts["Q"]
    if plan.finite:
        state.rho_R = partial_trace(rho1, dims, 2)
        state.rho_SR = partial_trace(rho1, dims, [0, 2])
        rho_R_start = partial_trace(rho0, dims, 2)
        Q = -expectation(reservoir.H_R, state.rho_R - rho_R_start)
        if rho_SR is None:
            state.extras["two_system"] = exact_two_system_sigma(
                rho1, (plan.d_X, plan.d_R), np.kron(rho_S, stream.rho_U), reservoir.H_R, reservoir.beta)

    H_S0, H_S1 = at(H_S, 0.0), at(H_S, stream.tau)
    beta = getattr(reservoir, "beta", None)
    ledger = build_ledger(
        dE_S=expectation(H_S1, state.rho_S) - expectation(H_S0, rho_S),
        dE_U=expectation(stream.H_U, state.rho_U - stream.rho_U),
        W_X=parts["W_X"], W_sw=parts["W_sw"], Q=Q,
        dS_S=von_neumann_entropy(state.rho_S) - von_neumann_entropy(rho_S),
        dS_U=von_neumann_entropy(state.rho_U) - von_neumann_entropy(stream.rho_U),
        I_SU=mutual_information(state.rho_SU, (plan.d_S, plan.d_U), 0),
        beta=beta,
    )
    return state, ledger


def interval_superoperator(H_S: OperatorLike, stream: UnitStreamSpec, reservoir: ReservoirMode | None,
                           d_S: int) -> np.ndarray:
    """Reduced one-interval map of the system as a superoperator matrix."""
    reservoir = NoReservoir() if reservoir is None else reservoir
    if isinstance(reservoir, FiniteReservoir) and not reservoir.reset:
        raise ValueError("the reduced map is only defined when the reservoir is reset")
    return _Plan(H_S, stream, reservoir, d_S).superoperator()
