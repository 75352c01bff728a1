import json
import subprocess
import sys

import pytest

from repint.cli import (EXIT_INVARIANT, EXIT_NUMERICAL, EXIT_OK, EXIT_SCHEMA, KINDS, PRESETS, ConfigError, execute,
                        main, to_csv, validate_config)


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_are_valid(name):
    cfg = PRESETS[name][1]
    assert cfg["kind"] in KINDS
    validate_config(cfg)


def test_schema_error_points_at_field(tmp_path, capsys):
    cfg = {"kind": "mj", "parameters": {"eps_bias": 2, "delta_in": 0.1, "tau": 1}}
    assert main(["run", _write(tmp_path, cfg)]) == EXIT_SCHEMA
    assert "/parameters/eps_bias" in capsys.readouterr().err


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError) as e:
        validate_config({"kind": "mj", "parameters": {"eps_bias": 0.1, "delta_in": 0, "tau": 1, "bogus": 1}})
    assert e.value.pointer == "/parameters"
    with pytest.raises(ConfigError):
        validate_config({"kind": "mj", "parameters": {"eps_bias": 0.1, "delta_in": 0, "tau": 1}, "extra": 0})
    with pytest.raises(ConfigError):
        validate_config({"kind": "teleport", "parameters": {}})


def test_grid_not_allowed_for_interval():
    with pytest.raises(ConfigError):
        validate_config({"kind": "interval", "parameters": {"tau": 1.0, "random": {"d_S": 2, "d_U": 2}},
                         "grid": {"V": [1]}})


def test_missing_matrix_is_config_error(tmp_path):
    cfg = {"kind": "interval", "parameters": {"tau": 1.0}}
    assert main(["run", _write(tmp_path, cfg), "--out", str(tmp_path)]) == EXIT_SCHEMA


def test_validate_only_writes_nothing(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "mj", "--validate-only", "--out", str(out)]) == EXIT_OK
    assert not out.exists()


def test_numerical_failure_exit_code(tmp_path):
    cfg = {"kind": "maser", "parameters": {"p_excited": 0.9, "kappa": 0.05, "n_intervals": 300}}
    assert main(["run", _write(tmp_path, cfg), "--out", str(tmp_path)]) == EXIT_NUMERICAL
    cfg = {"kind": "lwi", "parameters": {"P_a": 0.3, "P_b": 0.35, "P_c": 0.35, "rho_bc_re": -0.2}}
    assert main(["run", _write(tmp_path, cfg), "--out", str(tmp_path)]) == EXIT_NUMERICAL


def test_csv_is_deterministic_across_runs_and_jobs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "feedback_readout", "--out", str(a)]) == EXIT_OK
    assert main(["run", "feedback_readout", "--out", str(b), "--jobs", "2"]) == EXIT_OK
    assert (a / "feedback_readout.csv").read_bytes() == (b / "feedback_readout.csv").read_bytes()
    report = json.loads((a / "feedback_readout_report.json").read_text())
    assert all(c["passed"] for c in report["checks"])


def test_seed_override_changes_random_draws():
    cfg = json.loads(json.dumps(PRESETS["interval_random"][1]))
    r1, r2, r3 = execute(cfg), execute(cfg), execute(cfg, seed=99)
    assert to_csv(r1) == to_csv(r2)
    assert to_csv(r1) != to_csv(r3)


def test_adding_samples_keeps_earlier_ones():
    cfg = {"kind": "feedback", "seed": 4, "parameters": {"eps": 0.1, "beta": 1.0, "tau": 1.0, "n_samples": 2}}
    short = execute(cfg).rows
    cfg["parameters"]["n_samples"] = 4
    assert execute(cfg).rows[:2] == short


def test_explicit_matrices_and_complex_entries(tmp_path):
    cfg = {"kind": "interval", "parameters": {
        "H_S": {"diag": [0, 1]}, "H_U": {"diag": [0, 1]}, "rho_S": {"diag": [1, 0]}, "rho_U": {"diag": [0.5, 0.5]},
        "V_SU": {"re": [[0, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 0]],
                 "im": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]},
        "tau": 1.0, "n_intervals": 3}}
    res = execute(cfg)
    assert res.ok and len(res.rows) == 3


def test_invariant_failure_exit_code(tmp_path, monkeypatch):
    import repint.cli as cli

    def broken(cfg, seed, jobs):
        r = cli.RunResult(["x"], [[1.0]])
        r.check("always_false", False)
        return r

    monkeypatch.setitem(cli.RUNNERS, "mj", broken)
    assert main(["run", "mj", "--out", str(tmp_path)]) == EXIT_INVARIANT


def test_list_presets_and_module_entry(tmp_path):
    out = subprocess.run([sys.executable, "-m", "repint", "list-presets", "--write", str(tmp_path)],
                         capture_output=True, text=True, check=True).stdout
    assert "demon_fig" in out and "mj" in out
    written = json.loads((tmp_path / "demon_fig.json").read_text())
    validate_config(written)
    assert written["parameters"]["beta"] == 0.1
