import csv
import io
import json

import pytest

import ui.cli as cli
from src.selfcheck import CheckResult
from src.utils import RootFindError
from ui.cli import RunConfig, cmd_selfcheck, main

CIRCULAR = ["--k", "1", "--q", "1,0,0", "--p", "0,1,0"]


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# ==================== PROPAGATE ====================
def test_propagate_csv(capsys):
    code = main(["propagate", "--method", "exact", *CIRCULAR, "--h", "0.1", "--steps", "100", "--format", "csv"])
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "step,s,t,qx,qy,qz,px,py,pz,energy,Lx,Ly,Lz,ks_constraint"
    assert len(lines) == 102


def test_propagate_zero_steps(capsys):
    assert main(["propagate", *CIRCULAR, "--h", "0.1", "--steps", "0"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 2


def test_propagate_output_is_byte_deterministic(capsys):
    argv = ["propagate", "--method", "exact", "--q", "0.4,0,0", "--p", "0,2,0", "--h", "0.1", "--steps", "50"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    second = capsys.readouterr().out
    assert first == second


def test_propagate_json_to_file(tmp_path, capsys):
    out = tmp_path / "traj.json"
    code = main(["propagate", "--method", "verlet", *CIRCULAR, "--dt", "0.05", "--steps", "4",
                 "--format", "json", "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    data = json.loads(out.read_text())
    assert data["meta"]["method"] == "verlet"
    assert len(data["samples"]) == 5


def test_propagate_exact_with_physical_step(capsys):
    assert main(["propagate", *CIRCULAR, "--dt", "0.5", "--steps", "4"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert float(rows[-1]["t"]) == pytest.approx(2.0, abs=1e-11)


def test_collision_state_is_a_usage_error(capsys):
    code = main(["propagate", "--q", "0,0,0", "--p", "0,1,0", "--h", "0.1", "--steps", "10"])
    err = capsys.readouterr().err
    assert code == 2
    assert "collision state" in err


@pytest.mark.parametrize(
    "extra",
    [
        ["--method", "exact", "--h", "0.1", "--dt", "0.1"],
        ["--method", "exact"],
        ["--method", "midpoint", "--dt", "0.1"],
        ["--method", "rk4", "--h", "0.1"],
        ["--h", "-0.1"],
        ["--h", "0.1", "--k", "0"],
    ],
)
def test_invalid_configurations(extra, capsys):
    code = main(["propagate", *CIRCULAR, "--steps", "10", *extra])
    assert code == 2
    assert capsys.readouterr().err.startswith("error:")


@pytest.mark.parametrize(
    "argv",
    [
        ["propagate", "--q", "1,0", "--p", "0,1,0", "--h", "0.1", "--steps", "1"],
        ["propagate", "--q", "1,0,x", "--p", "0,1,0", "--h", "0.1", "--steps", "1"],
        ["propagate", "--method", "euler", *CIRCULAR, "--h", "0.1", "--steps", "1"],
        ["propagate", *CIRCULAR, "--h", "0.1"],
        ["propagate", *CIRCULAR, "--h", "0.1", "--steps", "-1"],
        ["launch"],
    ],
)
def test_usage_errors(argv):
    assert main(argv) == 2


def test_runtime_failure_exit_code(monkeypatch, capsys):
    def failing_propagate(*_args, **_kwargs):
        raise RootFindError("root find failed: no convergence")

    monkeypatch.setattr(cli, "propagate", failing_propagate)
    code = main(["propagate", *CIRCULAR, "--dt", "0.1", "--steps", "3"])
    assert code == 1
    assert "root find failed" in capsys.readouterr().err


@pytest.mark.parametrize(
    "step",
    [
        ["--h", "2000"],
        ["--dt", "1e300"],
    ],
)
def test_overflowing_step_is_a_runtime_failure(step, capsys):
    code = main(["propagate", "--q", "1,0,0", "--p", "0,2,0", *step, "--steps", "1"])
    err = capsys.readouterr().err
    assert code == 1
    assert err.splitlines()[-1].startswith("error: numerical failure: step too large")


def test_arithmetic_error_is_a_runtime_failure(monkeypatch, capsys):
    def overflowing_propagate(*_args, **_kwargs):
        raise OverflowError("math range error")

    monkeypatch.setattr(cli, "propagate", overflowing_propagate)
    code = main(["propagate", *CIRCULAR, "--h", "0.1", "--steps", "3"])
    assert code == 1
    assert "floating-point range exceeded" in capsys.readouterr().err


@pytest.mark.parametrize("command", [
    ["propagate", *CIRCULAR, "--h", "0.1", "--steps", "3"],
    ["compare", "--methods", "exact", *CIRCULAR, "--h", "0.1", "--steps", "3"],
])
def test_unwritable_output_path(command, tmp_path, capsys):
    out = tmp_path / "missing" / "x.csv"
    code = main([*command, "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 1
    assert captured.out == ""
    assert captured.err.splitlines()[-1].startswith("error: output failed:")
    assert not out.exists()


def test_run_config_builds_schedule():
    config = RunConfig(method="midpoint", q0="1,0,0", p0="0,1,0", h=0.2, steps=7)
    assert config.schedule().h == 0.2
    assert config.initial_state().q.tolist() == [1.0, 0.0, 0.0]


# ==================== COMPARE ====================
def test_compare_exact_and_rk4(capsys):
    code = main(["compare", "--methods", "exact,rk4", *CIRCULAR, "--h", "0.1", "--dt", "0.1", "--steps", "628"])
    rows = _rows(capsys.readouterr().out)
    assert code == 0
    assert [row["method"] for row in rows] == ["exact", "rk4"]
    assert float(rows[0]["energy_drift"]) <= 1e-12
    assert float(rows[1]["energy_drift"]) > float(rows[0]["energy_drift"])
    assert rows[1]["constraint_residual_max"] == ""


def test_compare_single_method_with_oracle(capsys):
    code = main(["compare", "--methods", "midpoint", *CIRCULAR, "--h", "0.1", "--steps", "20",
                 "--oracle", "--format", "json"])
    rows = json.loads(capsys.readouterr().out)
    assert code == 0
    assert len(rows) == 1
    assert "rms_position_error" in rows[0]


@pytest.mark.parametrize("methods", ["", ",", "exact,leapfrog"])
def test_compare_rejects_bad_method_lists(methods, capsys):
    code = main(["compare", "--methods", methods, *CIRCULAR, "--h", "0.1", "--steps", "5"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


# ==================== SELFCHECK ====================
def test_selfcheck_passes(capsys):
    code = main(["selfcheck"])
    lines = capsys.readouterr().out.splitlines()
    group_lines = [line for line in lines if line.startswith(("PASS", "FAIL"))]
    assert code == 0
    assert len(group_lines) >= 5
    assert all(line.startswith("PASS") for line in group_lines)


def test_selfcheck_reports_injected_fault(capsys):
    def broken_check(_rng):
        return CheckResult(name="broken", passed=False, worst=1.0, tolerance=1e-12)

    code = cmd_selfcheck([broken_check])
    assert code == 1
    assert "FAIL broken" in capsys.readouterr().out
