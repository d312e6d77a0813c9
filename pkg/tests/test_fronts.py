import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from frontspeed.core import Direction, GridSpec, PeriodicCell, PeriodicMedium
from frontspeed.eigen import find_lambda0
from frontspeed.errors import FrontNotFoundError
from frontspeed.fronts import (WaveProfile, decay_rate, default_spacing, extract_profile, fit_trace,
                               measure_speed, pulsating_residual, track_front)
from frontspeed.nonlinearity import make_ignition, make_ignition_approx, make_kpp
from frontspeed.simulate import SimState, plan_grid

E1 = Direction((1.0,))
LINE = GridSpec((-10.0,), (110.0,), (2201,), ("noflux",))
CELL = PeriodicCell((1.0,))
# fine-grid 1D run (h = 0.05, t_end = 120), frozen; the shooting oracle gives 0.495370
IGNITION_SPEED = 0.49533


def synthetic_states(profile, speed, times, grid=LINE):
    x = grid.coordinates()[..., 0]
    return [SimState(float(t), profile(x - speed * t), grid) for t in times]


def tanh_front(z):
    return 0.5 * (1.0 - np.tanh(z - 3.0))


@settings(max_examples=25, deadline=None)
@given(c=st.floats(0.2, 2.0), level=st.floats(0.3, 0.7))
def test_synthetic_tanh_speed(c, level):
    states = synthetic_states(tanh_front, c, np.arange(0, 40.5, 0.5))
    tr = track_front(states, E1, level)
    assert tr.speed == pytest.approx(c, abs=1e-3)


def test_synthetic_speed_two():
    tr = track_front(synthetic_states(tanh_front, 2.0, np.arange(0, 40.5, 0.5)), E1, 0.5)
    assert abs(tr.speed - 2.0) <= 1e-3


def test_stationary_profile():
    tr = track_front(synthetic_states(tanh_front, 0.0, np.arange(0, 20.5, 0.5)), E1, 0.5)
    assert abs(tr.speed) <= 1e-6


def test_no_crossing_raises():
    grid = LINE
    states = [SimState(float(t), np.zeros(grid.nodes), grid) for t in range(10)]
    with pytest.raises(FrontNotFoundError, match="no level crossing"):
        track_front(states, E1, 0.5)


def test_log_model_recovers_lag():
    t = np.arange(1.0, 60.0, 0.5)
    m = 2.0 * t - 1.5 * np.log(t) + 3.0
    tr = fit_trace(E1, t, m, model="log")
    assert tr.speed == pytest.approx(2.0, abs=1e-10)
    assert tr.log_coefficient == pytest.approx(-1.5, abs=1e-9)


def test_kpp_run_reaches_eighty(line_medium):
    m = measure_speed(line_medium, make_kpp(1.0, line_medium.cell), E1, t_end=40, h=0.05)
    assert m.speed == pytest.approx(2.0, rel=0.02)
    # pulled fronts lag 2t by (3/2) ln t plus a bounded shift
    assert m.trace.log_coefficient == pytest.approx(-1.5, rel=0.2)
    assert 80.0 - 1.5 * math.log(40.0) - 5.0 <= m.trace.positions[-1] <= 80.0


@pytest.mark.slow
def test_kpp_grid_refinement(line_medium):
    nl = make_kpp(1.0, line_medium.cell)
    coarse = measure_speed(line_medium, nl, E1, t_end=40, h=0.05).speed
    fine = measure_speed(line_medium, nl, E1, t_end=40, h=0.025).speed
    assert abs(fine - coarse) <= 0.01 * fine


def test_ignition_speed_pinned():
    med = PeriodicMedium.homogeneous(1, None, 2.0, 64)
    m = measure_speed(med, make_ignition(0.3, 1.0, med.cell), E1, t_end=100, h=0.1)
    assert m.speed == pytest.approx(IGNITION_SPEED, rel=2e-3)
    assert IGNITION_SPEED == pytest.approx(oracles.ignition_speed(0.3), rel=2e-4)


def test_ignition_grid_refinement():
    med = PeriodicMedium.homogeneous(1, None, 2.0, 64)
    nl = make_ignition(0.3, 1.0, med.cell)
    coarse = measure_speed(med, nl, E1, t_end=60, h=0.1).speed
    fine = measure_speed(med, nl, E1, t_end=60, h=0.05).speed
    assert abs(fine - coarse) <= 0.01 * fine


def test_level_invariance_for_sharp_fronts():
    med = PeriodicMedium.homogeneous(1, None, 2.0, 64)
    T = 200.0
    plan = plan_grid(med, E1, 0.1, 20.0, 0.6 * T + 15.0)
    m = measure_speed(med, make_ignition(0.3, 1.0, med.cell), E1, t_end=T, plan=plan,
                      transient_cut=0.6, levels=(0.3, 0.4, 0.5, 0.6, 0.7))
    speeds = list(m.trace.meta["levels"].values())
    assert max(speeds) - min(speeds) <= 1e-6


def test_approx_speed_below_kpp(line_medium):
    base = make_kpp(1.0, line_medium.cell)
    full = measure_speed(line_medium, base, E1, t_end=30, h=0.05)
    approx = measure_speed(line_medium, make_ignition_approx(base, 0.05), E1, t_end=30, h=0.05)
    assert approx.speed <= full.speed


def test_backward_direction(line_medium):
    nl = make_kpp(1.0, line_medium.cell)
    fwd = measure_speed(line_medium, nl, E1, t_end=20, h=0.05).speed
    back = measure_speed(line_medium, nl, Direction((-1.0,)), t_end=20, h=0.05).speed
    assert back == pytest.approx(fwd, abs=1e-9)


def test_oblique_homogeneous_speed():
    med = PeriodicMedium.homogeneous(2, None, 2.0, 16)
    nl = make_kpp(1.0, med.cell)
    m = measure_speed(med, nl, Direction.from_angle(math.pi / 4), t_end=20, h=0.125)
    assert m.plan.kind == "strip"
    assert m.speed == pytest.approx(2.0, rel=0.03)


def test_default_spacing():
    assert default_spacing(PeriodicCell((1.0,))) == pytest.approx(0.05)
    assert default_spacing(PeriodicCell((1.0, 2.0))) == pytest.approx(0.0625)
    assert 1.0 / default_spacing(PeriodicCell((0.5,))) % 1 == pytest.approx(0.0)


@pytest.fixture(scope="module")
def kpp_run():
    med = PeriodicMedium.homogeneous(1, None, 1.0, 64)
    m = measure_speed(med, make_kpp(1.0, med.cell), E1, t_end=40, h=0.05, keep_states=True)
    return med, m


@pytest.fixture(scope="module")
def ignition_run():
    med = PeriodicMedium.homogeneous(1, None, 1.0, 64)
    m = measure_speed(med, make_ignition(0.3, 1.0, med.cell), E1, t_end=80, h=0.05,
                      keep_states=True)
    return med, m


def test_kpp_profile(kpp_run):
    med, m = kpp_run
    p = extract_profile(m.states, E1, m.speed, med.cell, trace=m.trace, boundary_margin=20)
    assert p.monotonicity_violation() <= 1e-3
    assert p.pulsating_residual <= 0.02
    lam = decay_rate(p)
    assert lam == pytest.approx(1.0, rel=0.2)


def test_ignition_profile(ignition_run):
    med, m = ignition_run
    p = extract_profile(m.states, E1, m.speed, med.cell, trace=m.trace, boundary_margin=20)
    assert p.monotonicity_violation() <= 1e-3
    U = p.mean_profile()
    behind = (p.z <= -10.0) & np.isfinite(U)
    assert behind.any() and U[behind].min() >= 0.98
    lam0 = find_lambda0(PeriodicMedium.homogeneous(1, None, 1.0, 16), m.speed).lam0
    assert decay_rate(p) >= 0.9 * lam0


def test_synthetic_pulsating_residual():
    states = synthetic_states(tanh_front, 1.25, np.arange(0, 20.0, 0.4))
    r = pulsating_residual(states, E1, 1.25, PeriodicCell((1.0,)), margin=10)
    assert r <= 1e-10


def test_profile_window_too_short(kpp_run):
    med, m = kpp_run
    short = [s for s in m.states if s.t <= 1.5]
    with pytest.raises(FrontNotFoundError, match="3 cell crossings"):
        extract_profile(short, E1, m.speed, med.cell)


def _exp_profile(rate, z, columns=4):
    U = np.exp(-rate * z)[:, None] * np.ones((1, columns))
    return WaveProfile(E1, 1.0, z, np.arange(columns), U, 0.0, 0.0)


def test_synthetic_exponential_tail():
    assert decay_rate(_exp_profile(1.0, np.linspace(0.0, 20.0, 401))) == pytest.approx(1.0, abs=1e-3)


def test_decay_needs_four_points():
    with pytest.raises(FrontNotFoundError, match="need 4"):
        decay_rate(_exp_profile(1.0, np.array([2.5, 3.0, 3.5]), columns=1))


def test_decay_ignores_floor_noise():
    z = np.linspace(0.0, 60.0, 601)
    p = _exp_profile(0.8, z)
    p.U[p.U < 1e-13] = 1e-300
    assert decay_rate(p) == pytest.approx(0.8, abs=1e-3)
