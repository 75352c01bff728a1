"""Thermodynamics of a system interacting with a stream of units."""

from .audits import (Classification, CycleNotClosedError, CycleReport, LandauerReport, ReservoirClass,
                     classical_floor_check, classify_stream, kelvin_planck_cycle, landauer_audit, swap_resetter)
from .feedback import (FeedbackHamiltonianError, FeedbackReport, FeedbackSpec, StageLedger,
                       feedback_protocol, feedback_superoperator, noisy_readout_feedback)
from .fixed_point import ConvergenceError, FixedPointResult, stroboscopic_fixed_point
from .interval import (MAX_COMPOSITE_DIM, MAX_RESERVOIR_DIM, FiniteReservoir, IntervalState,
                       NoReservoir, ReservoirMode, ResourceLimitError, ThermoLedger, UnitStreamSpec,
                       WeakReservoir, build_ledger, exact_two_system_sigma, interval_superoperator,
                       run_interval, switching_work, write_ledger_csv)

__all__ = [
    "Classification", "ConvergenceError", "CycleNotClosedError", "CycleReport",
    "FeedbackHamiltonianError", "FeedbackReport", "FeedbackSpec", "FiniteReservoir",
    "FixedPointResult", "IntervalState", "LandauerReport", "MAX_COMPOSITE_DIM", "MAX_RESERVOIR_DIM",
    "NoReservoir", "ReservoirClass", "ReservoirMode", "ResourceLimitError", "StageLedger",
    "ThermoLedger", "UnitStreamSpec", "WeakReservoir", "build_ledger", "classical_floor_check",
    "classify_stream", "exact_two_system_sigma", "feedback_protocol", "feedback_superoperator",
    "interval_superoperator", "kelvin_planck_cycle", "landauer_audit", "noisy_readout_feedback", "run_interval",
    "stroboscopic_fixed_point", "swap_resetter", "switching_work", "write_ledger_csv",
]
