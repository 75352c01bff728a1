"""Scenario runner.

``repint run CONFIG [--seed N] [--out DIR] [--validate-only] [--jobs K]`` executes a
JSON scenario and writes a CSV plus a JSON report; ``repint list-presets``
prints the built-in scenarios (``--write DIR`` saves them as config files).
``CONFIG`` may also be the name of a preset.

Exit status: 0 success, 1 an invariant check failed, 2 the config is
invalid, 3 a numerical failure.

Randomness: every random draw comes from
``numpy.random.default_rng([seed, component, index])`` where ``component``
is fixed per use (see ``_STREAMS``) and ``index`` counts items within it,
so adding sweep points or samples never changes earlier ones.

Matrices in configs are nested lists of numbers, ``{"re": ..., "im": ...}``
or ``{"diag": [...]}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np
from scipy.linalg import expm

from . import __version__
from .effective_me import (DriveMimicSpec, PoissonKickSpec, RegularKickSpec, RateLedger, drive_mimic,
                           poisson_generator, poisson_rates, regular_kick_generator, regular_kick_rates,
                           trajectory_sampler)
from .generators import IntegrationError, NonUniqueSteadyStateError, ThermalBathSpec, unvec, vec
from .models import (DemonSpec, LasingThresholdError, LindbladViolationError, LWISpec,
                     MandalJarzynskiSpec, MaserSpec, SWEEP_HEADER, TruncationLeakError, demon_sweep,
                     lwi_photon_number, lwi_steady_number, maser_run, mj_run)
from .operators import (DensityMatrixError, sample_hermitian, sample_state, sigma_x, trace_distance)
from .repeated_interaction import (ConvergenceError, CycleNotClosedError, FiniteReservoir, NoReservoir,
                                   ResourceLimitError, ThermoLedger, UnitStreamSpec, WeakReservoir,
                                   feedback_protocol, feedback_superoperator, kelvin_planck_cycle,
                                   noisy_readout_feedback, run_interval, stroboscopic_fixed_point,
                                   swap_resetter)

EXIT_OK, EXIT_INVARIANT, EXIT_SCHEMA, EXIT_NUMERICAL = 0, 1, 2, 3
KINDS = ("interval", "stroboscopic", "poisson_me", "regular_kick", "drive_mimic", "feedback", "mj",
         "maser", "lwi", "demon_sweep", "kelvin_planck")
_STREAMS = {"matrices": 0, "trajectories": 1, "feedback": 2, "kelvin_planck": 3}
NUMERICAL_ERRORS = (IntegrationError, NonUniqueSteadyStateError, ConvergenceError, TruncationLeakError,
                    LasingThresholdError, ResourceLimitError, CycleNotClosedError, np.linalg.LinAlgError,
                    FloatingPointError)


class ConfigError(ValueError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


# --- schema ------------------------------------------------------------------

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int = {"type": "integer", "minimum": 1}
_real_rows = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _num}}
_matrix = {"oneOf": [
    _real_rows,
    {"type": "object", "properties": {"re": _real_rows, "im": _real_rows}, "required": ["re"],
     "additionalProperties": False},
    {"type": "object", "properties": {"diag": {"type": "array", "minItems": 1, "items": _num}},
     "required": ["diag"], "additionalProperties": False},
]}
_time_grid = {"type": "object", "properties": {"t_max": _pos, "n_points": {"type": "integer", "minimum": 2}},
              "required": ["t_max", "n_points"], "additionalProperties": False}
_random = {"type": "object", "properties": {"d_S": _int, "d_U": _int, "coupling": _pos},
           "required": ["d_S", "d_U"], "additionalProperties": False}
_bath = {"type": "object", "properties": {
    "beta": _pos, "couplings": {"type": "array", "minItems": 1, "items": _matrix},
    "gamma0": _pos, "profile": {"enum": ["flat", "ohmic"]}, "cutoff": _pos},
    "required": ["beta"], "additionalProperties": False}
_reservoir = {"type": "object", "properties": {
    "type": {"enum": ["none", "weak", "finite"]}, "beta": _pos,
    "couplings": {"type": "array", "minItems": 1, "items": _matrix}, "gamma0": _pos,
    "during_interaction": {"type": "boolean"}, "H_R": _matrix, "H_XR": _matrix},
    "required": ["type"], "additionalProperties": False}


def _obj(props: dict, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_interval_props = {
    "H_S": _matrix, "H_U": _matrix, "rho_S": _matrix, "rho_U": _matrix, "V_SU": _matrix, "random": _random,
    "tau": _pos, "tau_prime": {"type": "number", "minimum": 0}, "reservoir": _reservoir,
    "dt_max": _pos,
}
PARAMETER_SCHEMAS = {
    "interval": _obj({**_interval_props, "n_intervals": _int}, ["tau"]),
    "stroboscopic": _obj({**_interval_props, "tol": _pos}, ["tau"]),
    "poisson_me": _obj({"gamma": {"type": "number", "minimum": 0}, "H_S": _matrix, "H_U": _matrix,
                        "rho_U": _matrix, "V": _matrix, "rho_S0": _matrix, "random": _random,
                        "bath": _bath, "beta_units": _pos,
                        "n_traj": {"type": "integer", "minimum": 0}}, ["gamma"]),
    "regular_kick": _obj({"H_S": _matrix, "H_U": _matrix, "rho_U": _matrix, "V_tilde": _matrix,
                          "rho_S0": _matrix, "beta_units": _pos}, ["H_S", "H_U", "rho_U", "V_tilde", "rho_S0"]),
    "drive_mimic": _obj({"H_0": _matrix, "A": _matrix, "rho_S0": _matrix,
                         "f": _obj({"shape": {"enum": ["sin", "linear", "constant"]}, "amplitude": _num,
                                    "omega": _num, "phase": _num, "slope": _num, "offset": _num}, ["shape"]),
                         "dt": _pos, "horizon": _pos, "F_scale": _pos}, ["H_0", "A", "rho_S0", "f", "dt", "horizon"]),
    "feedback": _obj({"eps": {"type": "number", "minimum": 0, "maximum": 1}, "beta": _pos, "tau": _pos,
                      "gamma0": _pos, "H_S_levels": {"type": "array", "minItems": 2, "maxItems": 2, "items": _num},
                      "n_samples": _int, "level_scale": _pos}, ["eps", "beta", "tau"]),
    "mj": _obj({"eps_bias": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
                "delta_in": {"type": "number", "minimum": -1, "maximum": 1}, "tau": _pos, "beta": _pos},
               ["eps_bias", "delta_in", "tau"]),
    "maser": _obj({"Omega": _pos, "Delta": _pos, "g": {"type": "number", "minimum": 0},
                   "p_excited": {"type": "number", "minimum": 0, "maximum": 1}, "beta": _pos,
                   "kappa": {"type": "number", "minimum": 0}, "tau_free": {"type": "number", "minimum": 0},
                   "tau_prime": _pos, "N_max": {"type": "integer", "minimum": 2}, "n_intervals": _int,
                   "tol": _pos, "work_tol": _pos}),
    "lwi": _obj({"P_a": {"type": "number", "minimum": 0}, "P_b": {"type": "number", "minimum": 0},
                 "P_c": {"type": "number", "minimum": 0}, "rho_bc_re": _num, "rho_bc_im": _num,
                 "gamma_eff": _pos, "N_max": {"type": "integer", "minimum": 2}, "N0": {"type": "number", "minimum": 0},
                 "thermal_beta": _pos}),
    "demon_sweep": _obj({"Gamma": _pos, "delta_fb": _num, "beta": _pos, "eps_S": _num,
                         "eps": {"type": "array", "minItems": 1,
                                 "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}}}),
    "kelvin_planck": _obj({"n_cycles": _int, "beta": _pos, "omega_S": _pos,
                           "omega_U_range": {"type": "array", "minItems": 2, "maxItems": 2, "items": _pos},
                           "p_range": {"type": "array", "minItems": 2, "maxItems": 2, "items": _num},
                           "tau_reset": _pos}),
}
_value_grid = {"oneOf": [
    {"type": "array", "minItems": 1, "items": _num},
    _obj({"start": _num, "stop": _num, "num": {"type": "integer", "minimum": 1}}, ["start", "stop", "num"]),
]}
GRID_SCHEMAS = {
    "poisson_me": _time_grid, "regular_kick": _time_grid, "lwi": _time_grid,
    "mj": _obj({"eps_bias": _value_grid, "delta_in": _value_grid}),
    "demon_sweep": _obj({"V": _value_grid}, ["V"]),
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(KINDS)},
        "parameters": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string", "pattern": r"^[\w.-]+\.csv$"},
        "grid": {"type": "object"},
        "description": {"type": "string"},
    },
    "required": ["kind", "parameters"],
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": k}}, "required": ["kind"]},
         "then": {"properties": {"parameters": PARAMETER_SCHEMAS[k],
                                 "grid": GRID_SCHEMAS.get(k, {"not": {}})}}}
        for k in KINDS
    ],
}


def validate_config(cfg) -> None:
    """Raise :class:`ConfigError` pointing at the first offending field."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    err = jsonschema.exceptions.best_match(validator.iter_errors(cfg))
    if err is not None:
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise ConfigError(pointer, err.message)


# --- parsing helpers -----------------------------------------------------------

def _mat(x, where: str) -> np.ndarray:
    if isinstance(x, dict) and "diag" in x:
        return np.diag(np.asarray(x["diag"], dtype=float)).astype(complex)
    if isinstance(x, dict):
        m = np.asarray(x["re"], dtype=float) + 1j * np.asarray(x.get("im", np.zeros_like(x["re"])), dtype=float)
    else:
        m = np.asarray(x, dtype=float).astype(complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(where, f"expected a square matrix, got shape {m.shape}")
    return m


def _rng(seed: int, stream: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, _STREAMS[stream], index])


def _values(spec) -> list[float]:
    if isinstance(spec, list):
        return [float(v) for v in spec]
    return [float(v) for v in np.linspace(spec["start"], spec["stop"], spec["num"])]


def _times(grid) -> np.ndarray:
    return np.linspace(0.0, grid["t_max"], grid["n_points"])


def _random_operators(p: dict, seed: int) -> dict:
    """Fill in unspecified operators from the seeded matrix stream."""
    out = {}
    r = p.get("random")
    if r is None:
        return out
    d_S, d_U = r["d_S"], r["d_U"]
    rng = _rng(seed, "matrices")
    out["H_S"] = sample_hermitian(rng, d_S)
    out["H_U"] = sample_hermitian(rng, d_U)
    out["rho_S"] = sample_state(rng, d_S)
    out["rho_U"] = sample_state(rng, d_U)
    out["V"] = sample_hermitian(rng, d_S * d_U, r.get("coupling", 1.0))
    return out


def _pick(p, rand, key, rand_key=None, where="/parameters"):
    if key in p:
        return _mat(p[key], f"{where}/{key}")
    k = rand_key or key
    if k in rand:
        return rand[k]
    raise ConfigError(f"{where}/{key}", "required unless 'random' is given")


def _reservoir(p, d_S, d_U):
    r = p.get("reservoir", {"type": "none"})
    where = "/parameters/reservoir"
    if r["type"] == "none":
        return NoReservoir(r.get("beta"))
    if "beta" not in r:
        raise ConfigError(where, "'beta' is required for a reservoir")
    if r["type"] == "weak":
        cs = tuple(_mat(c, f"{where}/couplings") for c in r.get("couplings", [])) or (
            (np.eye(d_S, k=1) + np.eye(d_S, k=-1)).astype(complex),)
        return WeakReservoir(ThermalBathSpec(r["beta"], cs, gamma0=r.get("gamma0", 1.0)),
                             during_interaction=r.get("during_interaction", True))
    if "H_R" not in r or "H_XR" not in r:
        raise ConfigError(where, "a finite reservoir needs H_R and H_XR")
    return FiniteReservoir(_mat(r["H_R"], f"{where}/H_R"), _mat(r["H_XR"], f"{where}/H_XR"), r["beta"])


def _bath(b) -> ThermalBathSpec | None:
    if b is None:
        return None
    cs = tuple(_mat(c, "/parameters/bath/couplings") for c in b.get("couplings", [])) or (sigma_x(),)
    return ThermalBathSpec(b["beta"], cs, profile=b.get("profile", "flat"), gamma0=b.get("gamma0", 1.0),
                           cutoff=b.get("cutoff", 10.0))


# --- results -------------------------------------------------------------------

@dataclass
class RunResult:
    header: list
    rows: list
    checks: list = field(default_factory=list)   # (name, passed, detail)
    summary: dict = field(default_factory=dict)

    def check(self, name: str, passed: bool, detail: str = ""):
        self.checks.append({"name": name, "passed": bool(passed), "detail": detail})

    @property
    def ok(self) -> bool:
        return all(c["passed"] for c in self.checks)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def to_csv(result: RunResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.header)
    for row in result.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _ledger_checks(res: RunResult, ledgers, label="interval"):
    worst_first = max(abs(l.first_law_residual) for l in ledgers)
    res.check("first_law", worst_first < 1e-8, f"max residual {worst_first:.2e}")
    res.check("mutual_information_nonnegative", min(l.I_SU for l in ledgers) >= -1e-9)
    res.check("sigma_S_bounds_information", all(l.Sigma_S >= l.I_SU - 1e-9 for l in ledgers))
    res.check("sigma_S_bounds_sigma", all(l.Sigma_S >= l.Sigma - 1e-12 for l in ledgers))


# --- runners ---------------------------------------------------------------------

def _stream_from(p, seed):
    rand = _random_operators(p, seed)
    H_S = _pick(p, rand, "H_S")
    H_U = _pick(p, rand, "H_U")
    rho_S = _pick(p, rand, "rho_S")
    rho_U = _pick(p, rand, "rho_U")
    d_S, d_U = H_S.shape[0], H_U.shape[0]
    V = _mat(p["V_SU"], "/parameters/V_SU") if "V_SU" in p else rand.get("V", np.zeros((d_S * d_U,) * 2))
    stream = UnitStreamSpec(H_U=H_U, rho_U=rho_U, tau=p["tau"], tau_prime=p.get("tau_prime"), V_SU=V,
                            dt_max=p.get("dt_max", 1e-3))
    return H_S, rho_S, stream, _reservoir(p, d_S, d_U)


def run_interval_kind(cfg, seed, jobs):
    p = cfg["parameters"]
    H_S, rho, stream, res = _stream_from(p, seed)
    ledgers = []
    for _ in range(p.get("n_intervals", 1)):
        state, led = run_interval(rho, H_S, stream, res)
        ledgers.append(led)
        rho = state.rho_S
    out = RunResult(["interval"] + ThermoLedger.header(), [[k] + l.row() for k, l in enumerate(ledgers)])
    _ledger_checks(out, ledgers)
    return out


def run_stroboscopic(cfg, seed, jobs):
    p = cfg["parameters"]
    H_S, rho, stream, res = _stream_from(p, seed)
    fp = stroboscopic_fixed_point(rho, H_S, stream, res, tol=p.get("tol", 1e-10))
    state, led = run_interval(fp.rho, H_S, stream, res)
    d = fp.rho.shape[0]
    pops = [float(np.real(fp.rho[i, i])) for i in range(d)]
    out = RunResult(ThermoLedger.header() + ["iterations", "contraction_ratio"] + [f"p{i}" for i in range(d)],
                    [led.row() + [fp.iterations, fp.contraction_ratio] + pops])
    _ledger_checks(out, [led])
    out.check("steady_state_reached", trace_distance(state.rho_S, fp.rho) < 1e-8)
    out.check("contracting", fp.contracting, f"spectral ratio {fp.contraction_ratio:.4g}")
    return out


def run_poisson(cfg, seed, jobs):
    p = cfg["parameters"]
    rand = _random_operators(p, seed)
    H_S, H_U = _pick(p, rand, "H_S"), _pick(p, rand, "H_U")
    rho_U, rho0 = _pick(p, rand, "rho_U"), _pick(p, rand, "rho_S0", "rho_S")
    V = _pick(p, rand, "V")
    spec = PoissonKickSpec(gamma=p["gamma"], H_S=H_S, H_U=H_U, rho_U=rho_U, V=V, bath=_bath(p.get("bath")),
                           beta_units=p.get("beta_units"))
    times = _times(cfg.get("grid", {"t_max": 10.0, "n_points": 101}))
    L = poisson_generator(spec)
    d = H_S.shape[0]
    states = [unvec(expm(L * t) @ vec(rho0), d) for t in times]
    n_traj = p.get("n_traj", 0)
    mc = trajectory_sampler(spec, rho0, times, n_traj, seed=seed) if n_traj else None
    header = ["t"] + RateLedger.header() + (["trace_distance_mc"] if mc else [])
    rows, ledgers = [], []
    for k, (t, r) in enumerate(zip(times, states)):
        led = poisson_rates(spec, 0.5 * (r + r.conj().T))
        ledgers.append(led)
        rows.append([t] + led.row() + ([trace_distance(r, mc.mean[k])] if mc else []))
    out = RunResult(header, rows)
    worst = min(l.Sigma_S - l.lower_bound for l in ledgers)
    out.check("rate_second_law", worst >= -1e-9, f"min slack {worst:.2e}")
    out.check("first_law", max(abs(l.first_law_residual) for l in ledgers) < 1e-8)
    if mc:
        out.summary["max_trace_distance_mc"] = max(r[-1] for r in rows)
    return out


def run_regular_kick(cfg, seed, jobs):
    p = cfg["parameters"]
    m = {k: _mat(p[k], f"/parameters/{k}") for k in ("H_S", "H_U", "rho_U", "V_tilde", "rho_S0")}
    spec = RegularKickSpec(H_S=m["H_S"], H_U=m["H_U"], rho_U=m["rho_U"], V_tilde=m["V_tilde"],
                           beta_units=p.get("beta_units"))
    L = regular_kick_generator(spec)
    d = m["H_S"].shape[0]
    times = _times(cfg.get("grid", {"t_max": 5.0, "n_points": 51}))
    rows, ledgers = [], []
    for t in times:
        r = unvec(expm(L * t) @ vec(m["rho_S0"]), d)
        rates = regular_kick_rates(spec, 0.5 * (r + r.conj().T))
        ledgers.append(rates.ledger)
        rows.append([t] + rates.ledger.row() + [rates.dS_U_bar, rates.mixing])
    out = RunResult(["t"] + RateLedger.header() + ["dS_U_bar", "mixing"], rows)
    out.check("first_law", max(abs(l.first_law_residual) for l in ledgers) < 1e-8)
    out.check("mixing_nonnegative", min(r[-1] for r in rows) >= -1e-12)
    return out


def _drive_function(f):
    shape, A = f["shape"], f.get("amplitude", 1.0)
    if shape == "sin":
        w, ph, off = f.get("omega", 1.0), f.get("phase", 0.0), f.get("offset", 0.0)
        return (lambda t: off + A * math.sin(w * t + ph)), (lambda t: A * w * math.cos(w * t + ph))
    if shape == "linear":
        s, off = f.get("slope", 0.1), f.get("offset", 0.0)
        return (lambda t: off + s * t), (lambda t: s)
    off = f.get("offset", A)
    return (lambda t: off), (lambda t: 0.0)


def run_drive_mimic(cfg, seed, jobs):
    p = cfg["parameters"]
    f, df = _drive_function(p["f"])
    spec = DriveMimicSpec(H_0=_mat(p["H_0"], "/parameters/H_0"), A=_mat(p["A"], "/parameters/A"), f=f, df=df,
                          dt=p["dt"], horizon=p["horizon"], F_scale=p.get("F_scale", 1.0))
    r = drive_mimic(spec, _mat(p["rho_S0"], "/parameters/rho_S0"))
    rows = [[r.times[k + 1], r.trace_distance[k + 1], r.work_rate_mimic[k], r.work_rate_forward[k],
             r.work_rate_direct[k], r.unit_entropy_change[k]] for k in range(len(r.work_rate_mimic))]
    out = RunResult(["t", "trace_distance", "work_rate_mimic", "work_rate_forward", "work_rate_direct",
                     "unit_entropy_change"], rows)
    out.check("unit_entropy_unchanged", np.max(np.abs(r.unit_entropy_change)) < 1e-12)
    gap = np.max(np.abs(r.work_rate_mimic - r.work_rate_direct))
    out.check("work_matches_drive", gap <= 5 * spec.dt * r.scale, f"max gap {gap:.2e}, bound {5 * spec.dt * r.scale:.2e}")
    return out


def _feedback_sample(args):
    p, seed, k = args
    rng = _rng(seed, "feedback", k)
    scale = p.get("level_scale", 2.0)
    H_S = np.diag(p.get("H_S_levels", [0.0, 1.0])).astype(complex)
    Hs = [np.diag(rng.normal(size=2) * scale).astype(complex) for _ in range(2)]
    spec = noisy_readout_feedback(H_S, Hs, p["eps"], p["beta"], p["tau"], gamma0=p.get("gamma0", 1.0))
    fp = stroboscopic_fixed_point(np.eye(2) / 2, channel=feedback_superoperator(spec), tol=1e-13)
    rep = feedback_protocol(fp.rho, spec)
    return [k, rep.I_ms, -rep.beta * rep.feedback.W, rep.information_bound_slack, rep.steady_bound_slack,
            max(abs(x) for x in rep.first_law_residuals)]


def _pmap(fn, items, jobs):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def run_feedback(cfg, seed, jobs):
    p = cfg["parameters"]
    rows = _pmap(_feedback_sample, [(p, seed, k) for k in range(p.get("n_samples", 10))], jobs)
    out = RunResult(["sample", "I_ms", "minus_beta_W_fb", "information_bound_slack", "steady_bound_slack",
                     "first_law_residual"], rows)
    out.check("feedback_second_law", min(r[3] for r in rows) >= -1e-9)
    out.check("generalized_bound", min(r[4] for r in rows) >= -1e-9)
    out.check("first_law", max(r[5] for r in rows) < 1e-8)
    return out


def _mj_point(args):
    e, d, tau, beta = args
    r = mj_run(MandalJarzynskiSpec(e, d, tau, beta))
    return [e, d, *r.p_S, r.p_U_out[1], r.W_sw, r.Q, r.dS_U, r.second_law_slack, r.ledger.Sigma,
            r.classification.reservoir_class.value]


def run_mj(cfg, seed, jobs):
    p, g = cfg["parameters"], cfg.get("grid", {})
    es = _values(g["eps_bias"]) if "eps_bias" in g else [p["eps_bias"]]
    ds = _values(g["delta_in"]) if "delta_in" in g else [p["delta_in"]]
    for e in es:
        if not -1 < e < 1:
            raise ConfigError("/grid/eps_bias", f"value {e} outside (-1, 1)")
    rows = _pmap(_mj_point, [(e, d, p["tau"], p.get("beta", 1.0)) for e in es for d in ds], jobs)
    out = RunResult(["eps_bias", "delta_in", "p_A", "p_B", "p_C", "p1_out", "W_sw", "Q", "dS_U",
                     "second_law_slack", "Sigma", "unit_class"], rows)
    out.check("information_second_law", min(r[9] for r in rows) >= -1e-9)
    out.check("heat_equals_minus_switching_work", max(abs(r[7] + r[6]) for r in rows) < 1e-10)
    return out


def run_maser(cfg, seed, jobs):
    p = dict(cfg["parameters"])
    n, tol, wt = p.pop("n_intervals", 200), p.pop("tol", None), p.pop("work_tol", 1e-3)
    r = maser_run(MaserSpec(**p), n_intervals=n, tol=tol, work_tol=wt)
    rows = [[k + 1, r.photon_numbers[k + 1]] + l.row() + [c.reservoir_class.value]
            for k, (l, c) in enumerate(zip(r.ledgers, r.classifications))]
    out = RunResult(["interval", "n_mean"] + ThermoLedger.header() + ["unit_class"], rows)
    out.check("first_law", max(abs(l.first_law_residual) for l in r.ledgers) < 1e-8)
    out.check("truncation_leak", r.max_top_population < 1e-6, f"top level {r.max_top_population:.2e}")
    out.summary.update(thermal_mean=r.thermal_mean, final_mean=float(r.photon_numbers[-1]),
                       pumped_above_thermal=r.pumped_above_thermal, converged=r.converged,
                       unit_class=r.classification.reservoir_class.value)
    return out


def run_lwi(cfg, seed, jobs):
    p = cfg["parameters"]
    common = dict(gamma_eff=p.get("gamma_eff", 1.0), N_max=p.get("N_max", 30))
    if "thermal_beta" in p:
        spec = LWISpec.thermal(p["thermal_beta"], **common)
    else:
        missing = [k for k in ("P_a", "P_b", "P_c") if k not in p]
        if missing:
            raise ConfigError("/parameters", f"missing {missing} (or give thermal_beta)")
        spec = LWISpec(p["P_a"], p["P_b"], p["P_c"], complex(p.get("rho_bc_re", 0.0), p.get("rho_bc_im", 0.0)),
                       **common)
    times = _times(cfg.get("grid", {"t_max": 10.0, "n_points": 101}))
    N, N_eff = lwi_photon_number(spec, times, p.get("N0", 0.0))
    N_me = lwi_steady_number(spec)
    out = RunResult(["t", "N"], [[t, n] for t, n in zip(times, N)])
    out.check("steady_number_matches_closed_form", abs(N_me - N_eff) < 1e-6, f"{float(N_me)!r} vs {float(N_eff)!r}")
    out.summary.update(N_eff=N_eff, N_steady_generator=N_me)
    return out


def _demon_point(args):
    base, e, V = args
    return demon_sweep(base, V_grid=[V], eps_grid=[e])[0].row()


def run_demon(cfg, seed, jobs):
    p = cfg["parameters"]
    base = DemonSpec(eps_ms=0.5, delta_fb=p.get("delta_fb", math.log(2)), Gamma=p.get("Gamma", 1.0),
                     beta=p.get("beta", 0.1), eps_S=p.get("eps_S", 0.0))
    Vs = _values(cfg["grid"]["V"]) if "grid" in cfg else [float(v) for v in np.linspace(0, 60, 61)]
    rows = _pmap(_demon_point, [(base, e, V) for e in p.get("eps", [0.1]) for V in Vs], jobs)
    out = RunResult(list(SWEEP_HEADER), rows)
    i = SWEEP_HEADER.index
    out.check("sigma_ge_sigma_eff", all(r[i("sigma_total")] >= r[i("sigma_eff")] - 1e-9 for r in rows))
    out.check("sigma_eff_nonnegative", all(r[i("sigma_eff")] >= -1e-9 for r in rows))
    out.summary["work_extraction_points"] = sum(r[i("chem_work_rate")] < 0 for r in rows)
    return out


def _kp_cycle(args):
    p, seed, k = args
    rng = _rng(seed, "kelvin_planck", k)
    beta = p.get("beta", 1.0)
    lo, hi = p.get("omega_U_range", [1.5, 3.0])
    plo, phi = p.get("p_range", [0.6, 0.95])
    wU, pe, g = rng.uniform(lo, hi), rng.uniform(plo, phi), rng.uniform(0.3, 1.5)
    tau, tp = rng.uniform(1.0, 3.0), rng.uniform(0.3, 1.0)
    up = np.array([[0, 0], [1, 0]], dtype=complex)
    H_S = np.diag([0.0, p.get("omega_S", 1.0)]).astype(complex)
    stream = UnitStreamSpec(H_U=np.diag([0.0, wU]).astype(complex), rho_U=np.diag([1 - pe, pe]), tau=tau,
                            tau_prime=tp, V_SU=g * (np.kron(up, up.T) + np.kron(up.T, up)))
    res = WeakReservoir(ThermalBathSpec(beta, (sigma_x(),)), during_interaction=False)
    H_r, r_stream, r_res, r0 = swap_resetter(stream, beta, tau_reset=p.get("tau_reset", 40.0))
    rep = kelvin_planck_cycle(H_S, stream, res, H_r, r_stream, r_res, np.eye(2) / 2, r0)
    return [k, wU, pe, rep.W, rep.W_reset, rep.W + rep.W_reset, rep.slack, rep.reset_error]


def run_kelvin_planck(cfg, seed, jobs):
    p = cfg["parameters"]
    rows = _pmap(_kp_cycle, [(p, seed, k) for k in range(p.get("n_cycles", 20))], jobs)
    out = RunResult(["cycle", "omega_U", "p_excited", "W", "W_reset", "W_total", "slack", "reset_error"], rows)
    out.check("no_net_work_from_one_bath", min(r[5] for r in rows) >= -1e-9)
    out.summary["work_extracting_cycles"] = sum(r[3] < 0 for r in rows)
    return out


RUNNERS = {
    "interval": run_interval_kind, "stroboscopic": run_stroboscopic, "poisson_me": run_poisson,
    "regular_kick": run_regular_kick, "drive_mimic": run_drive_mimic, "feedback": run_feedback,
    "mj": run_mj, "maser": run_maser, "lwi": run_lwi, "demon_sweep": run_demon,
    "kelvin_planck": run_kelvin_planck,
}


# --- presets ---------------------------------------------------------------------

_QUBIT_UP = [[0, 0], [1, 0]]
PRESETS = {
    "interval_random": ("Random 2x3 interval with a weak thermal bath, five intervals", {
        "kind": "interval", "seed": 7,
        "parameters": {"random": {"d_S": 2, "d_U": 3}, "tau": 1.0, "tau_prime": 0.6, "n_intervals": 5,
                       "reservoir": {"type": "weak", "beta": 1.0, "gamma0": 0.5}}}),
    "stroboscopic_random": ("Stroboscopic steady state of a random qubit-qubit stream", {
        "kind": "stroboscopic", "seed": 3,
        "parameters": {"random": {"d_S": 2, "d_U": 2}, "tau": 1.0, "tau_prime": 0.5,
                       "reservoir": {"type": "weak", "beta": 1.0}}}),
    "poisson_qubit": ("Poisson kicks on a qubit with a Monte Carlo cross-check", {
        "kind": "poisson_me", "seed": 11,
        "parameters": {"gamma": 1.0, "random": {"d_S": 2, "d_U": 2}, "n_traj": 2000},
        "grid": {"t_max": 10.0, "n_points": 41}}),
    "regular_kick_qubit": ("Frequent weak kicks by thermal qubits (exchange coupling)", {
        "kind": "regular_kick",
        "parameters": {"H_S": {"diag": [0.0, 1.0]}, "H_U": {"diag": [0.0, 1.0]},
                       "rho_U": {"diag": [0.7310585786300049, 0.2689414213699951]}, "beta_units": 1.0,
                       "V_tilde": [[0, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 0]],
                       "rho_S0": {"diag": [0.2, 0.8]}},
        "grid": {"t_max": 5.0, "n_points": 51}}),
    "drive_sine": ("Units reproducing a sinusoidal drive on a qubit", {
        "kind": "drive_mimic",
        "parameters": {"H_0": {"diag": [0.5, -0.5]}, "A": [[0, 1], [1, 0]], "rho_S0": {"diag": [1.0, 0.0]},
                       "f": {"shape": "sin", "amplitude": 0.8, "omega": 1.3}, "dt": 0.01, "horizon": 2.0}}),
    "feedback_readout": ("Noisy qubit readout with random diagonal feedback Hamiltonians", {
        "kind": "feedback", "seed": 5,
        "parameters": {"eps": 0.1, "beta": 1.0, "tau": 1.0, "n_samples": 20}}),
    "mj": ("Three-state engine writing on a bit tape (eps=0.5, delta=0.8, tau=10)", {
        "kind": "mj", "parameters": {"eps_bias": 0.5, "delta_in": 0.8, "tau": 10.0, "beta": 1.0}}),
    "mj_grid": ("Bit-tape engine over a 20x20 grid of bias and incoming bit polarisation", {
        "kind": "mj", "parameters": {"eps_bias": 0.0, "delta_in": 0.0, "tau": 10.0},
        "grid": {"eps_bias": {"start": -0.95, "stop": 0.95, "num": 20},
                 "delta_in": {"start": -1.0, "stop": 1.0, "num": 20}}}),
    "maser": ("Cavity pumped by atoms with excitation probability 0.9", {
        "kind": "maser", "parameters": {"p_excited": 0.9, "kappa": 0.5, "n_intervals": 400, "tol": 1e-12}}),
    "maser_work": ("Excited atoms through a cold, damped cavity: a work-like stream", {
        "kind": "maser", "parameters": {"p_excited": 1.0, "beta": 10.0, "kappa": 2.0, "tau_free": 10.0,
                                        "n_intervals": 20}}),
    "lwi_thermal": ("Coherence-free thermal atoms: cavity stays at the Bose occupation", {
        "kind": "lwi", "parameters": {"thermal_beta": 1.0}}),
    "lwi_coherent": ("Atoms with a negative lower-level coherence pumping the cavity", {
        "kind": "lwi", "parameters": {"P_a": 0.15, "P_b": 0.425, "P_c": 0.425, "rho_bc_re": -0.1}}),
    "demon_fig": ("Feedback demon on a quantum dot, Gamma=1, delta=ln 2, beta=0.1", {
        "kind": "demon_sweep",
        "parameters": {"Gamma": 1.0, "delta_fb": math.log(2), "beta": 0.1, "eps": [0.05, 0.1, 0.25, 0.5]},
        "grid": {"V": {"start": 0.0, "stop": 60.0, "num": 121}}}),
    "kelvin_planck": ("Work extraction from inverted units, closed by a thermal resetter", {
        "kind": "kelvin_planck", "seed": 1, "parameters": {"n_cycles": 20, "beta": 1.0}}),
}


def list_presets(out=None, write_dir: str | None = None) -> int:
    out = out or sys.stdout
    for name, (desc, cfg) in PRESETS.items():
        print(f"{name:<22} {cfg['kind']:<14} {desc}", file=out)
        if write_dir:
            Path(write_dir).mkdir(parents=True, exist_ok=True)
            (Path(write_dir) / f"{name}.json").write_text(json.dumps(cfg, indent=2) + "\n")
    return EXIT_OK


# --- entry points ------------------------------------------------------------------

def load_config(source: str) -> dict:
    path = Path(source)
    if not path.exists() and source in PRESETS:
        return json.loads(json.dumps(PRESETS[source][1]))
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError("/", f"config file {source!r} not found and not a preset name")
    except json.JSONDecodeError as e:
        raise ConfigError("/", f"invalid JSON: {e}")


def execute(cfg: dict, seed: int | None = None, jobs: int = 1) -> RunResult:
    validate_config(cfg)
    s = cfg.get("seed", 0) if seed is None else seed
    return RUNNERS[cfg["kind"]](cfg, s, jobs)


def run(source: str, seed: int | None = None, out_dir: str = ".", validate_only: bool = False,
        jobs: int = 1, stream=None, err=None) -> int:
    stream, err = stream or sys.stdout, err or sys.stderr
    try:
        cfg = load_config(source)
        validate_config(cfg)
    except ConfigError as e:
        print(f"config error at {e}", file=err)
        return EXIT_SCHEMA
    if validate_only:
        print("config valid", file=stream)
        return EXIT_OK
    start = time.perf_counter()
    try:
        with np.errstate(over="raise", invalid="ignore", divide="ignore"):
            result = execute(cfg, seed, jobs)
    except ConfigError as e:
        print(f"config error at {e}", file=err)
        return EXIT_SCHEMA
    except (DensityMatrixError, LindbladViolationError, ValueError) as e:
        if isinstance(e, NUMERICAL_ERRORS):
            print(f"numerical failure: {type(e).__name__}: {e}", file=err)
            return EXIT_NUMERICAL
        print(f"config error at /parameters: {e}", file=err)
        return EXIT_SCHEMA
    except NUMERICAL_ERRORS as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=err)
        return EXIT_NUMERICAL
    wall = time.perf_counter() - start

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = cfg.get("output", f"{Path(source).stem if Path(source).exists() else source}.csv")
    csv_path = out / name
    csv_path.write_text(to_csv(result))
    report = {"version": __version__, "config": cfg, "seed": cfg.get("seed", 0) if seed is None else seed,
              "wall_time_s": wall, "csv": str(csv_path), "checks": result.checks,
              "summary": {k: (v if isinstance(v, (str, bool, int)) else float(v))
                          for k, v in result.summary.items()}}
    (out / (csv_path.stem + "_report.json")).write_text(json.dumps(report, indent=2) + "\n")
    for c in result.checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} {c['detail']}".rstrip(), file=stream)
    print(f"wrote {csv_path}", file=stream)
    return EXIT_OK if result.ok else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="repint", description="Run repeated-interaction thermodynamics scenarios.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario config (JSON path or preset name)")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--out", default=".", help="output directory")
    r.add_argument("--validate-only", action="store_true", help="check the config and exit")
    r.add_argument("--jobs", type=int, default=1, help="worker processes for sweep points")
    lp = sub.add_parser("list-presets", help="print the built-in scenarios")
    lp.add_argument("--write", metavar="DIR", default=None, help="also save each preset as DIR/<name>.json")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-presets":
        return list_presets(write_dir=args.write)
    if args.seed is not None and args.seed < 0:
        print("config error at --seed: must be non-negative", file=sys.stderr)
        return EXIT_SCHEMA
    return run(args.config, seed=args.seed, out_dir=args.out, validate_only=args.validate_only, jobs=args.jobs)


if __name__ == "__main__":
    sys.exit(main())
