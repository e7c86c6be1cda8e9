"""
src/serialization.py

Trajectory and comparison-table writers.

CSV uses a fixed header and fixed 17-significant-digit scientific floats so
identical runs give identical bytes. JSON uses Python's shortest round-trip
float repr; trajectory_from_json reads it back so that re-emitting a parsed
document reproduces it byte for byte.
"""

import csv
import io
import json
from typing import Any, Dict, List, Optional, Sequence

from config.settings import csv_float_format
from src.propagator import FixedFictitious, FixedPhysical
from src.core import (
    KeplerState,
    OscillatorState,
    Params,
    Sample,
    SampleDiagnostics,
    Trajectory,
)
from src.utils import ParameterError, as_vec3, setup_logger

# Setup logger
logger = setup_logger(__name__)

CSV_HEADER = [
    "step", "s", "t",
    "qx", "qy", "qz",
    "px", "py", "pz",
    "energy", "Lx", "Ly", "Lz",
    "ks_constraint",
]


def _fmt(value: Optional[float]) -> str:
    """CSV float cell; None becomes an empty cell."""
    if value is None:
        return ""
    return format(float(value), csv_float_format())


def _csv_text(rows: Sequence[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


# ==================== TRAJECTORIES ====================
def trajectory_to_csv(traj: Trajectory) -> str:
    """Flat, plot-ready CSV; ks_constraint is empty for baseline runs."""
    rows: List[List[str]] = [CSV_HEADER]
    for sample in traj.samples:
        q, p = sample.state.q, sample.state.p
        L = sample.diagnostics.angular_momentum
        rows.append([
            str(sample.step),
            _fmt(sample.s),
            _fmt(sample.t),
            *(_fmt(x) for x in q),
            *(_fmt(x) for x in p),
            _fmt(sample.diagnostics.energy),
            *(_fmt(x) for x in L),
            _fmt(sample.diagnostics.ks_constraint),
        ])
    return _csv_text(rows)


def _floats(values) -> List[float]:
    return [float(x) for x in values]


def _schedule_to_dict(schedule: Any) -> Optional[Dict[str, Any]]:
    if schedule is None:
        return None
    if isinstance(schedule, FixedFictitious):
        return {"kind": "fictitious", "h": float(schedule.h), "n_steps": int(schedule.n_steps)}
    return {"kind": "physical", "dt": float(schedule.dt), "n_steps": int(schedule.n_steps)}


def _schedule_from_dict(data: Optional[Dict[str, Any]]) -> Any:
    if data is None:
        return None
    if data["kind"] == "fictitious":
        return FixedFictitious(h=data["h"], n_steps=data["n_steps"])
    return FixedPhysical(dt=data["dt"], n_steps=data["n_steps"])


def trajectory_to_dict(traj: Trajectory) -> Dict[str, Any]:
    """Plain JSON-ready structure (lists and Python floats only)."""
    params = traj.meta.get("params")
    meta = {
        "method": traj.meta.get("method"),
        "k": float(params.k) if params is not None else None,
        "E": float(params.E) if params is not None else None,
        "schedule": _schedule_to_dict(traj.meta.get("schedule")),
        "aborted": bool(traj.meta.get("aborted", False)),
    }
    samples = []
    for sample in traj.samples:
        entry: Dict[str, Any] = {
            "step": int(sample.step),
            "s": float(sample.s),
            "t": float(sample.t),
            "q": _floats(sample.state.q),
            "p": _floats(sample.state.p),
            "energy": float(sample.diagnostics.energy),
            "L": _floats(sample.diagnostics.angular_momentum),
            "ks_constraint": (
                None if sample.diagnostics.ks_constraint is None
                else float(sample.diagnostics.ks_constraint)
            ),
        }
        if sample.oscillator is not None:
            entry["Q"] = _floats(sample.oscillator.Q)
            entry["P"] = _floats(sample.oscillator.P)
        samples.append(entry)
    return {"meta": meta, "samples": samples}


def trajectory_to_json(traj: Trajectory) -> str:
    """Deterministic JSON document (2-space indent, trailing newline)."""
    return json.dumps(trajectory_to_dict(traj), indent=2) + "\n"


def trajectory_from_json(text: str) -> Trajectory:
    """
    Rebuild a Trajectory from trajectory_to_json output.

    Raises:
        ParameterError: If the document is not a trajectory
    """
    try:
        data = json.loads(text)
        meta_in = data["meta"]
        samples_in = data["samples"]
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        logger.error(f"Could not parse trajectory JSON: {e}")
        raise ParameterError(f"not a trajectory document: {e}")

    meta: Dict[str, Any] = {
        "method": meta_in["method"],
        "schedule": _schedule_from_dict(meta_in.get("schedule")),
        "aborted": meta_in.get("aborted", False),
    }
    if meta_in.get("k") is not None:
        meta["params"] = Params(k=meta_in["k"], E=meta_in["E"])

    samples = []
    for entry in samples_in:
        oscillator = None
        if "Q" in entry:
            oscillator = OscillatorState(Q=entry["Q"], P=entry["P"], s=entry["s"])
        samples.append(Sample(
            step=entry["step"],
            s=entry["s"],
            t=entry["t"],
            state=KeplerState(q=entry["q"], p=entry["p"], t=entry["t"]),
            oscillator=oscillator,
            diagnostics=SampleDiagnostics(
                energy=entry["energy"],
                angular_momentum=as_vec3(entry["L"], "L"),
                ks_constraint=entry["ks_constraint"],
            ),
        ))
    return Trajectory(samples=samples, meta=meta)


# ==================== COMPARISON TABLES ====================
def table_to_csv(rows: List[Dict[str, Any]]) -> str:
    """CSV table with the keys of the first row as header."""
    if not rows:
        return ""
    header = list(rows[0].keys())
    body = []
    for row in rows:
        cells = []
        for key in header:
            value = row.get(key)
            if isinstance(value, float) or value is None:
                cells.append(_fmt(value))
            else:
                cells.append(str(value))
        body.append(cells)
    return _csv_text([header, *body])


def table_to_json(rows: List[Dict[str, Any]]) -> str:
    return json.dumps(rows, indent=2) + "\n"
