"""End-to-end command-line tests: every subcommand, every exit code.

``main`` is called in-process so capsys can watch both streams; one
subprocess smoke check makes sure the module entry point stays runnable.
"""

import json
import subprocess
import sys

import pytest

from consensim.cli import (
    EXIT_ABORT,
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_OK,
    main,
)
from helpers import SCENARIO_DIR

BARRIER_1D = str(SCENARIO_DIR / "barrier_1d.json")


def write_scenario(tmp_path, d, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return str(path)


def nominal_pair(**over):
    d = {
        "controller": "nominal_double",
        "dimension": 1,
        "graph": {"n": 2, "edges": [[1, 2]]},
        "agents": [{"x0": [0.0], "v0": [0.3]}, {"x0": [1.0], "v0": [-0.2]}],
        "gamma1": 2.0, "gamma2": 1.5, "q": 0.6,
        "dt": 1e-2, "t_end": 0.2,
    }
    d.update(over)
    return d


def planar_pair(**over):
    d = {
        "controller": "single_common",
        "dimension": 2,
        "graph": {"n": 2, "edges": [[1, 2]]},
        "agents": [
            {"x0": [0.0, 0.5],
             "objective": {"type": "quadratic", "center": [2.0, 1.0]},
             "constraint": {"type": "affine", "normal": [1.0, 1.0],
                            "offset": -20.0}},
            {"x0": [1.0, -0.5],
             "objective": {"type": "quadratic", "center": [3.0, 2.0]},
             "constraint": {"type": "affine", "normal": [1.0, 1.0],
                            "offset": -20.0}},
        ],
        "alpha": 2.0, "beta1": 5.0, "beta2": 2.0,
        "dt": 1e-3, "t_end": 0.05,
    }
    d.update(over)
    return d


def breach_single_agent():
    return {
        "controller": "double_common",
        "dimension": 1,
        "graph": {"n": 1, "edges": []},
        "agents": [{"x0": [0.999999], "v0": [1e4],
                    "objective": {"type": "quadratic", "center": [0.0]},
                    "constraint": {"type": "affine", "normal": [1.0],
                                   "offset": -1.0}}],
        "alpha": 2.0, "gamma1": 1.0, "gamma2": 1.0, "q": 0.5,
        "dt": 1e-3, "t_end": 0.01,
    }


# ------------------------------------------------------------------------- run

def test_run_writes_the_full_output_set(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", BARRIER_1D, "--t-end", "1.0", "--out", str(out)])
    assert code == EXIT_OK
    assert (out / "trajectory.csv").is_file()
    assert (out / "summary.json").is_file()
    assert (out / "positions_time.svg").is_file()  # 1-D states
    assert (out / "consensus_error.svg").is_file()
    assert not (out / "velocities.svg").exists()  # single integrator
    captured = capsys.readouterr()
    assert "finished" in captured.out and "wrote" in captured.out
    summary = json.loads((out / "summary.json").read_text())
    assert summary["t_end"] == 1.0
    assert summary["aborted"] is None


def test_run_planar_scenario_gets_a_plane_figure(tmp_path):
    scn = write_scenario(tmp_path, planar_pair())
    out = tmp_path / "out"
    assert main(["run", scn, "--out", str(out)]) == EXIT_OK
    assert (out / "positions_2d.svg").is_file()
    assert not (out / "positions_time.svg").exists()


def test_run_double_scenario_gets_velocity_figure(tmp_path):
    scn = write_scenario(tmp_path, nominal_pair())
    out = tmp_path / "out"
    assert main(["run", scn, "--out", str(out)]) == EXIT_OK
    assert (out / "velocities.svg").is_file()


def test_aborted_run_exits_one_and_keeps_partial_outputs(tmp_path, capsys):
    scn = write_scenario(tmp_path, breach_single_agent())
    out = tmp_path / "out"
    code = main(["run", scn, "--out", str(out)])
    assert code == EXIT_ABORT
    captured = capsys.readouterr()
    assert "aborted" in captured.err
    assert "partial outputs" in captured.out
    assert (out / "trajectory.csv").is_file()


def test_missing_scenario_file_is_config_error(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.json")]) == EXIT_CONFIG
    assert "not found" in capsys.readouterr().err


def test_malformed_json_reports_line_and_column(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "controller": BAD\n}')
    assert main(["run", str(path)]) == EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err


def test_semantic_config_error_exits_two(tmp_path, capsys):
    d = planar_pair(p=0.7)
    scn = write_scenario(tmp_path, d)
    assert main(["run", scn]) == EXIT_CONFIG
    assert 'configure "q"' in capsys.readouterr().err


def test_infeasible_start_exits_three(tmp_path, capsys):
    d = planar_pair()
    d["agents"][0]["x0"] = [25.0, 0.0]
    scn = write_scenario(tmp_path, d)
    assert main(["run", scn, "--out", str(tmp_path / "o")]) == EXIT_INFEASIBLE
    assert "infeasible" in capsys.readouterr().err


# ------------------------------------------------------------------------ plot

def test_run_then_plot_round_trip(tmp_path):
    scn = write_scenario(tmp_path, nominal_pair())
    out = tmp_path / "out"
    assert main(["run", scn, "--out", str(out)]) == EXIT_OK
    fig = tmp_path / "v.svg"
    code = main(["plot", str(out / "trajectory.csv"), "velocities",
                 "--out", str(fig)])
    assert code == EXIT_OK
    assert fig.is_file() and fig.stat().st_size > 0


def test_plot_positions_2d_requires_planar_log(tmp_path, capsys):
    scn = write_scenario(tmp_path, nominal_pair())
    out = tmp_path / "out"
    main(["run", scn, "--out", str(out)])
    code = main(["plot", str(out / "trajectory.csv"), "positions_2d",
                 "--out", str(tmp_path / "p.svg")])
    assert code == EXIT_CONFIG
    assert "planar" in capsys.readouterr().err


# ---------------------------------------------------------------------- oracle

def test_oracle_prints_solution_record(capsys):
    assert main(["oracle", BARRIER_1D]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    # barrier_1d: min (x-2)^2 s.t. x <= 1, so the optimum pins the boundary
    assert record["optimum"]["x"][0] == pytest.approx(1.0, abs=1e-6)
    assert record["kkt_at_optimum"]["worst_violation"] == 0.0


def test_oracle_writes_file_and_accepts_x0(tmp_path, capsys):
    out = tmp_path / "oracle.json"
    code = main(["oracle", BARRIER_1D, "--x0", "0.5", "--tol", "1e-6",
                 "--out", str(out)])
    assert code == EXIT_OK
    assert "wrote" in capsys.readouterr().out
    record = json.loads(out.read_text())
    assert record["tol"] == 1e-6


def test_oracle_x0_validation(capsys):
    assert main(["oracle", BARRIER_1D, "--x0", "a,b"]) == EXIT_CONFIG
    assert "comma-separated" in capsys.readouterr().err
    assert main(["oracle", BARRIER_1D, "--x0", "0.5,0.5"]) == EXIT_CONFIG
    assert "components" in capsys.readouterr().err


def test_oracle_rejects_barrier_free_scenarios(tmp_path, capsys):
    scn = write_scenario(tmp_path, nominal_pair())
    assert main(["oracle", scn]) == EXIT_CONFIG
    assert "no constrained problem" in capsys.readouterr().err


# ----------------------------------------------------------------------- sweep

def test_sweep_writes_csv_table(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", BARRIER_1D, "--param", "beta2", "--values", "1,4",
                 "--jobs", "1", "--t-end", "0.2", "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("beta2,aborted,final_consensus_error")
    assert len(lines) == 3
    assert lines[1].split(",")[0] == "1.0"
    assert lines[2].split(",")[0] == "4.0"
    assert "tail_consensus_error" in capsys.readouterr().out


def test_sweep_values_must_be_floats(capsys):
    code = main(["sweep", BARRIER_1D, "--param", "beta2", "--values", "x",
                 "--jobs", "1"])
    assert code == EXIT_CONFIG
    assert "comma-separated floats" in capsys.readouterr().err


def test_sweep_unknown_param_rejected_by_parser():
    with pytest.raises(SystemExit) as exc:
        main(["sweep", BARRIER_1D, "--param", "zeta99", "--values", "1"])
    assert exc.value.code == 2


# ----------------------------------------------------------- environment knobs

def test_env_default_applies_and_flag_wins(tmp_path, monkeypatch):
    monkeypatch.setenv("CONSENSIM_T_END", "0.03")
    out1 = tmp_path / "a"
    assert main(["run", BARRIER_1D, "--out", str(out1)]) == EXIT_OK
    assert json.loads((out1 / "summary.json").read_text())["t_end"] == 0.03
    out2 = tmp_path / "b"
    assert main(["run", BARRIER_1D, "--t-end", "0.05",
                 "--out", str(out2)]) == EXIT_OK
    assert json.loads((out2 / "summary.json").read_text())["t_end"] == 0.05


def test_env_out_dir_honored(tmp_path, monkeypatch):
    monkeypatch.setenv("CONSENSIM_OUT", str(tmp_path / "envout"))
    monkeypatch.setenv("CONSENSIM_T_END", "0.02")
    assert main(["run", BARRIER_1D]) == EXIT_OK
    assert (tmp_path / "envout" / "summary.json").is_file()


def test_malformed_env_value_is_config_error(monkeypatch, capsys):
    monkeypatch.setenv("CONSENSIM_DT", "abc")
    assert main(["run", BARRIER_1D]) == EXIT_CONFIG
    assert "not a valid float" in capsys.readouterr().err


# ----------------------------------------------------------------- entry point

def test_module_entry_point_smoke():
    proc = subprocess.run([sys.executable, "-m", "consensim.cli", "--help"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert "usage: consensim" in proc.stdout
    for sub in ("run", "plot", "oracle", "sweep"):
        assert sub in proc.stdout
