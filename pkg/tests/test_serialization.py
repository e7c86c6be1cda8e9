import json

import pytest

from src.propagator import FixedFictitious, FixedPhysical, Method, propagate
from src.serialization import (
    CSV_HEADER,
    table_to_csv,
    table_to_json,
    trajectory_from_json,
    trajectory_to_csv,
    trajectory_to_dict,
    trajectory_to_json,
)
from src.utils import ParameterError


@pytest.fixture
def exact_traj(eccentric_orbit):
    return propagate(eccentric_orbit, 1.0, Method.EXACT_KS, FixedFictitious(h=0.1, n_steps=10))


@pytest.fixture
def rk4_traj(eccentric_orbit):
    return propagate(eccentric_orbit, 1.0, Method.RK4, FixedPhysical(dt=0.1, n_steps=10))


def test_csv_header_and_row_count(exact_traj):
    lines = trajectory_to_csv(exact_traj).splitlines()
    assert lines[0] == "step,s,t,qx,qy,qz,px,py,pz,energy,Lx,Ly,Lz,ks_constraint"
    assert lines[0].split(",") == CSV_HEADER
    assert len(lines) == 12


def test_csv_uses_seventeen_significant_digits(exact_traj):
    row = trajectory_to_csv(exact_traj).splitlines()[1].split(",")
    assert row[0] == "0"
    assert float(row[3]) == pytest.approx(0.4, abs=1e-15)
    mantissa = row[4].split("e")[0].lstrip("-")
    assert len(mantissa.replace(".", "")) == 17


def test_csv_is_deterministic(eccentric_orbit):
    schedule = FixedFictitious(h=0.1, n_steps=20)
    first = trajectory_to_csv(propagate(eccentric_orbit, 1.0, Method.EXACT_KS, schedule))
    second = trajectory_to_csv(propagate(eccentric_orbit, 1.0, Method.EXACT_KS, schedule))
    assert first == second


def test_csv_leaves_constraint_empty_for_baselines(rk4_traj):
    for line in trajectory_to_csv(rk4_traj).splitlines()[1:]:
        assert line.endswith(",")
        assert len(line.split(",")) == len(CSV_HEADER)


def test_json_structure(exact_traj):
    data = json.loads(trajectory_to_json(exact_traj))
    assert data["meta"]["method"] == "exact"
    assert data["meta"]["schedule"] == {"kind": "fictitious", "h": 0.1, "n_steps": 10}
    assert data["meta"]["E"] == pytest.approx(-0.5)
    assert len(data["samples"]) == 11
    assert set(data["samples"][0]) >= {"step", "s", "t", "q", "p", "energy", "L", "ks_constraint", "Q", "P"}


def test_json_baseline_has_no_oscillator_state(rk4_traj):
    data = trajectory_to_dict(rk4_traj)
    assert data["meta"]["aborted"] is False
    assert data["samples"][0]["ks_constraint"] is None
    assert "Q" not in data["samples"][0]


@pytest.mark.parametrize("traj_fixture", ["exact_traj", "rk4_traj"])
def test_json_reemits_identical_bytes(traj_fixture, request):
    text = trajectory_to_json(request.getfixturevalue(traj_fixture))
    assert trajectory_to_json(trajectory_from_json(text)) == text


def test_json_parse_rejects_other_documents():
    with pytest.raises(ParameterError, match="not a trajectory"):
        trajectory_from_json("{\"rows\": []}")
    with pytest.raises(ParameterError):
        trajectory_from_json("not json")


def test_table_writers():
    rows = [
        {"method": "exact", "steps": 3, "final_t": 0.5, "energy_drift": 0.0, "constraint_residual_max": 1e-17},
        {"method": "rk4", "steps": 3, "final_t": 0.5, "energy_drift": 1e-6, "constraint_residual_max": None},
    ]
    lines = table_to_csv(rows).splitlines()
    assert lines[0] == "method,steps,final_t,energy_drift,constraint_residual_max"
    assert lines[1].startswith("exact,3,5.0000000000000000e-01,")
    assert lines[2].endswith(",")
    assert json.loads(table_to_json(rows)) == rows
    assert table_to_csv([]) == ""
