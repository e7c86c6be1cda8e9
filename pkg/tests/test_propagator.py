import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from config.settings import settings
from src.core import KeplerState
from src.diagnostics import analytic_reference, conservation_report, trajectory_error
from src.propagator import (
    FixedFictitious,
    FixedPhysical,
    Method,
    propagate,
    propagate_baseline,
    propagate_exact,
    propagate_midpoint_ks,
)
from src.utils import ParameterError


# ==================== SCHEDULES ====================
def test_schedule_validation():
    with pytest.raises(ParameterError):
        FixedFictitious(h=0.0, n_steps=10)
    with pytest.raises(ParameterError):
        FixedFictitious(h=0.1, n_steps=-1)
    with pytest.raises(ParameterError):
        FixedPhysical(dt=-0.1, n_steps=10)
    with pytest.raises(ParameterError):
        FixedPhysical(dt=0.1, n_steps=2.5)


def test_method_names():
    assert [m.value for m in Method] == ["exact", "midpoint", "rk4", "verlet"]
    assert Method("exact").is_ks
    assert not Method("rk4").is_ks


# ==================== EXACT KS ====================
def test_exact_circular_orbit_full_period(circular_orbit):
    traj = propagate_exact(circular_orbit, 1.0, FixedFictitious(h=math.pi / 2, n_steps=4))
    assert len(traj) == 5
    final = traj.samples[-1]
    assert_allclose(final.state.q, [1, 0, 0], atol=1e-12)
    assert final.t == pytest.approx(2.0 * math.pi, abs=1e-12)
    assert final.s == pytest.approx(2.0 * math.pi)


def test_exact_zero_steps_returns_initial_sample(eccentric_orbit):
    traj = propagate_exact(eccentric_orbit, 1.0, FixedFictitious(h=0.1, n_steps=0))
    assert len(traj) == 1
    assert_allclose(traj.samples[0].state.q, eccentric_orbit.q, atol=1e-15)
    assert traj.samples[0].t == 0.0


def test_exact_samples_carry_both_representations(eccentric_orbit):
    traj = propagate_exact(eccentric_orbit, 1.0, FixedFictitious(h=0.1, n_steps=5))
    assert traj.meta["method"] == "exact"
    assert traj.params.E == pytest.approx(-0.5)
    for step, sample in enumerate(traj.samples):
        assert sample.step == step
        assert sample.oscillator is not None
        assert sample.diagnostics.ks_constraint is not None
        assert sample.oscillator.s == sample.s


def test_exact_eccentric_orbit_matches_reference(eccentric_orbit):
    traj = propagate_exact(eccentric_orbit, 1.0, FixedFictitious(h=0.1, n_steps=500))
    for sample in traj.samples:
        q_ref, p_ref = analytic_reference(eccentric_orbit, 1.0, sample.t)
        assert np.max(np.abs(sample.state.q - q_ref)) <= 1e-10
        assert np.max(np.abs(sample.state.p - p_ref)) <= 1e-10


@pytest.mark.parametrize("divisor", [2, 3])
def test_exact_is_step_size_independent(eccentric_orbit, divisor):
    coarse = propagate_exact(eccentric_orbit, 1.0, FixedFictitious(h=0.1, n_steps=500))
    fine = propagate_exact(eccentric_orbit, 1.0, FixedFictitious(h=0.1 / divisor, n_steps=500 * divisor))
    for sample in coarse.samples:
        twin = fine.samples[sample.step * divisor]
        assert np.max(np.abs(sample.state.q - twin.state.q)) <= 1e-11 * max(1.0, np.max(np.abs(twin.state.q)))
        assert np.max(np.abs(sample.state.p - twin.state.p)) <= 1e-11 * max(1.0, np.max(np.abs(twin.state.p)))
        assert sample.t == pytest.approx(twin.t, rel=1e-11)


def test_exact_conserves_integrals_over_hundred_periods(eccentric_orbit):
    # one orbital period spans 2 pi in fictitious time for this orbit
    traj = propagate_exact(eccentric_orbit, 1.0, FixedFictitious(h=0.1, n_steps=6284))
    assert traj.samples[-1].t >= 100.0 * 2.0 * math.pi - 1.0
    report = conservation_report(traj, 1.0)
    assert report.energy_drift <= 1e-11
    assert report.angmom_drift <= 1e-11
    assert report.lrl_drift <= 1e-11
    for sample in traj.samples:
        Q, P = sample.oscillator.Q, sample.oscillator.P
        assert abs(sample.diagnostics.ks_constraint) <= 1e-12 * np.linalg.norm(Q) * np.linalg.norm(P)


def test_exact_hyperbolic_orbit(hyperbolic_orbit):
    traj = propagate_exact(hyperbolic_orbit, 1.0, FixedFictitious(h=0.01, n_steps=200))
    assert traj.params.E == pytest.approx(1.0)
    stats = trajectory_error(traj, 1.0)
    assert stats.max_abs_position_error <= 1e-10
    assert stats.max_abs_momentum_error <= 1e-10
    assert conservation_report(traj, 1.0).energy_drift <= 1e-12


def test_exact_parabolic_orbit():
    # k = 1/2 makes E = 0 exactly and the KS lift exact
    initial = KeplerState(q=[1.0, 0.0, 0.0], p=[0.0, 1.0, 0.0])
    traj = propagate_exact(initial, 0.5, FixedFictitious(h=0.05, n_steps=100))
    assert traj.params.E == 0.0
    stats = trajectory_error(traj, 0.5)
    assert stats.max_abs_position_error <= 1e-10
    assert conservation_report(traj, 0.5).energy_drift <= 1e-12


def test_exact_physical_schedule_hits_requested_times(circular_orbit):
    traj = propagate_exact(circular_orbit, 1.0, FixedPhysical(dt=0.5, n_steps=10))
    assert_allclose(traj.times(), 0.5 * np.arange(11), atol=1e-11)
    q_ref, _ = analytic_reference(circular_orbit, 1.0, 5.0)
    assert_allclose(traj.samples[-1].state.q, q_ref, atol=1e-10)


def test_exact_physical_schedule_splits_long_steps(eccentric_orbit):
    # dt exceeds half the period, so each step needs several fictitious sub-steps
    traj = propagate_exact(eccentric_orbit, 1.0, FixedPhysical(dt=4.0, n_steps=3))
    assert_allclose(traj.times(), [0.0, 4.0, 8.0, 12.0], atol=1e-10)
    stats = trajectory_error(traj, 1.0)
    assert stats.max_abs_position_error <= 1e-10


def test_exact_physical_schedule_on_hyperbolic_orbit(hyperbolic_orbit):
    traj = propagate_exact(hyperbolic_orbit, 1.0, FixedPhysical(dt=0.25, n_steps=40))
    assert len(traj) == 41
    assert_allclose(traj.times(), 0.25 * np.arange(41), rtol=0, atol=1e-10)
    # one fictitious step per physical step: s grows with every sample
    assert np.all(np.diff([sample.s for sample in traj.samples]) > 0.0)
    assert trajectory_error(traj, 1.0).max_abs_position_error <= 1e-10
    assert conservation_report(traj, 1.0).energy_drift <= 1e-12


def test_exact_physical_schedule_on_parabolic_orbit():
    initial = KeplerState(q=[1.0, 0.0, 0.0], p=[0.0, 1.0, 0.0])
    traj = propagate_exact(initial, 0.5, FixedPhysical(dt=0.2, n_steps=50))
    assert traj.params.E == 0.0
    assert_allclose(traj.times(), 0.2 * np.arange(51), rtol=0, atol=1e-10)
    q_ref, p_ref = analytic_reference(initial, 0.5, 10.0)
    assert_allclose(traj.final.q, q_ref, atol=1e-10)
    assert_allclose(traj.final.p, p_ref, atol=1e-10)
    assert trajectory_error(traj, 0.5).max_abs_position_error <= 1e-10


# ==================== MIDPOINT KS ====================
def test_midpoint_conserves_energy_on_circular_orbit(circular_orbit):
    traj = propagate_midpoint_ks(circular_orbit, 1.0, 0.1, 100)
    assert conservation_report(traj, 1.0).energy_drift <= 1e-12


def test_midpoint_zero_steps(circular_orbit):
    traj = propagate_midpoint_ks(circular_orbit, 1.0, 0.1, 0)
    assert len(traj) == 1


def test_midpoint_is_second_order_but_conservative(eccentric_orbit):
    span = 2.0 * math.pi
    exact = propagate_exact(eccentric_orbit, 1.0, FixedFictitious(h=span / 128, n_steps=128))

    errors = []
    for n in (64, 128):
        traj = propagate_midpoint_ks(eccentric_orbit, 1.0, span / n, n)
        assert conservation_report(traj, 1.0).energy_drift <= 1e-12
        stride = 128 // n
        diffs = [
            np.linalg.norm(sample.state.q - exact.samples[sample.step * stride].state.q)
            for sample in traj.samples
        ]
        errors.append(math.sqrt(np.mean(np.square(diffs))))

    assert errors[1] > 0.0
    assert 3.5 <= errors[0] / errors[1] <= 4.5


# ==================== BASELINES ====================
def test_rk4_circular_orbit_accuracy(circular_orbit):
    traj = propagate_baseline(circular_orbit, 1.0, 0.01, 628, Method.RK4)
    assert len(traj) == 629
    assert traj.samples[-1].t == pytest.approx(6.28)
    stats = trajectory_error(traj, 1.0)
    assert stats.max_abs_position_error <= 1e-7


def test_verlet_energy_error_is_bounded(circular_orbit):
    traj = propagate_baseline(circular_orbit, 1.0, 0.01, 628, Method.STORMER_VERLET)
    assert conservation_report(traj, 1.0).energy_drift <= 1e-4


def test_baseline_samples_use_physical_time(circular_orbit):
    traj = propagate_baseline(circular_orbit, 1.0, 0.25, 4, Method.RK4)
    for sample in traj.samples:
        assert sample.s == sample.t
        assert sample.oscillator is None
        assert sample.diagnostics.ks_constraint is None
    assert traj.meta["aborted"] is False


def test_baseline_zero_steps(circular_orbit):
    assert len(propagate_baseline(circular_orbit, 1.0, 0.01, 0, Method.STORMER_VERLET)) == 1


def test_baseline_aborts_near_collision(monkeypatch, circular_orbit):
    monkeypatch.setattr(settings, "COLLISION_RADIUS", 10.0)
    traj = propagate_baseline(circular_orbit, 1.0, 0.1, 50, Method.RK4)
    assert traj.meta["aborted"] is True
    assert len(traj) == 1


def test_baseline_rejects_ks_method(circular_orbit):
    with pytest.raises(ParameterError):
        propagate_baseline(circular_orbit, 1.0, 0.1, 10, Method.EXACT_KS)


def test_rk4_drift_dwarfs_exact_drift(eccentric_orbit):
    n = 6284
    exact = propagate_exact(eccentric_orbit, 1.0, FixedFictitious(h=0.1, n_steps=n))
    rk4 = propagate_baseline(eccentric_orbit, 1.0, 0.1, n, Method.RK4)
    exact_drift = conservation_report(exact, 1.0).energy_drift
    rk4_drift = conservation_report(rk4, 1.0).energy_drift
    assert rk4_drift > 0.0
    assert rk4_drift >= 1e3 * exact_drift


# ==================== DISPATCH ====================
def test_propagate_dispatch(circular_orbit):
    assert propagate(circular_orbit, 1.0, Method.EXACT_KS, FixedPhysical(dt=0.1, n_steps=3)).meta["method"] == "exact"
    assert propagate(circular_orbit, 1.0, "midpoint", FixedFictitious(h=0.1, n_steps=3)).meta["method"] == "midpoint"
    assert propagate(circular_orbit, 1.0, "verlet", FixedPhysical(dt=0.1, n_steps=3)).meta["method"] == "verlet"


def test_propagate_rejects_mismatched_schedule(circular_orbit):
    with pytest.raises(ParameterError, match="--h"):
        propagate(circular_orbit, 1.0, Method.MIDPOINT_KS, FixedPhysical(dt=0.1, n_steps=3))
    with pytest.raises(ParameterError, match="--dt"):
        propagate(circular_orbit, 1.0, Method.RK4, FixedFictitious(h=0.1, n_steps=3))
