import math

from src.selfcheck import DEFAULT_CHECKS, CheckResult, run_selfcheck
from src.utils import RootFindError


def test_default_suite_passes():
    results = run_selfcheck()
    assert len(results) == len(DEFAULT_CHECKS) >= 5
    failed = [r for r in results if not r.passed]
    assert failed == []
    names = {r.name for r in results}
    assert {"ks_round_trip", "omega_identity", "time_map_agreement", "midpoint_exact_equivalence"} <= names


def test_suite_is_reproducible():
    first = [r.worst for r in run_selfcheck(DEFAULT_CHECKS[:2])]
    second = [r.worst for r in run_selfcheck(DEFAULT_CHECKS[:2])]
    assert first == second


def test_raising_check_counts_as_failure():
    def check_exploding(_rng):
        raise RootFindError("root find failed: test")

    def check_fine(_rng):
        return CheckResult(name="fine", passed=True, worst=0.0, tolerance=1.0)

    results = run_selfcheck([check_exploding, check_fine])
    assert results[0].name == "exploding"
    assert not results[0].passed
    assert math.isinf(results[0].worst)
    assert "root find failed" in results[0].detail
    assert results[1].passed
