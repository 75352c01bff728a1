"""Four worked scenarios: information engine, maser, coherence-pumped cavity, feedback demon."""

from .demon import (DemonPoint, DemonSpec, SWEEP_HEADER, demon_effective_generator, demon_sweep,
                    demon_thermo, effective_rates, information_rate, information_rate_factored,
                    information_rate_reduced, steady_populations, write_sweep_csv)
from .lwi import (LasingThresholdError, LindbladViolationError, LWISpec, lwi_closed_form_generator,
                  lwi_generator, lwi_kick_spec, lwi_photon_number, lwi_steady_number)
from .maser import MaserResult, MaserSpec, TruncationLeakError, maser_run
from .mj import (MandalJarzynskiSpec, MJResult, interval_balance, mj_rate_matrix, mj_run,
                 mj_stationary_direct, transfer_matrix)

__all__ = [
    "DemonPoint", "DemonSpec", "SWEEP_HEADER", "demon_effective_generator", "demon_sweep",
    "demon_thermo", "effective_rates", "information_rate", "information_rate_factored",
    "information_rate_reduced", "steady_populations", "write_sweep_csv",
    "LasingThresholdError", "LindbladViolationError", "LWISpec", "lwi_closed_form_generator",
    "lwi_generator", "lwi_kick_spec", "lwi_photon_number", "lwi_steady_number",
    "MaserResult", "MaserSpec", "TruncationLeakError", "maser_run",
    "MandalJarzynskiSpec", "MJResult", "interval_balance", "mj_rate_matrix", "mj_run",
    "mj_stationary_direct", "transfer_matrix",
]
