import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontspeed.core import Direction, GridSpec, PeriodicMedium
from frontspeed.errors import ConfigError, NumericalError, RangeGuardError, StabilityError
from frontspeed.nonlinearity import Nonlinearity, make_ignition, make_kpp
from frontspeed.simulate import (InitialData, Recorder, SimState, Stepper, comparison_run,
                                 orthogonal_lattice_vector, plan_grid, run, speed_bound, step)

HET_2D = {"cell": [1.0, 1.0], "resolution": 32,
          "diffusion": {"kind": "cosine_tensor", "amplitude": 0.5, "diag": [1.0, 2.0]},
          "advection": {"kind": "cellular", "amplitude": 1.0}}


def periodic_grid(cells, per_cell=16, length=1.0):
    dim = len(cells)
    return GridSpec((0.0,) * dim, tuple(c * length for c in cells),
                    tuple(c * per_cell for c in cells), ("periodic",) * dim)


def inert(cell):
    """f = 0 everywhere."""
    rate = make_kpp(1.0, cell).rate
    return Nonlinearity("ignition", rate, lambda u: np.zeros_like(np.asarray(u, dtype=float)),
                        theta=0.5)


def state(u, grid):
    return SimState(0.0, np.asarray(u, dtype=float).reshape(grid.nodes), grid)


def test_constant_state_unchanged(plane_medium):
    g = periodic_grid((2, 2))
    nl = inert(plane_medium.cell)
    st_ = state(np.full(g.nodes, 0.5), g)
    dt = Stepper(plane_medium, nl, g).dt_max
    for _ in range(5):
        st_ = step(st_, plane_medium, nl, dt)
    assert np.all(st_.u == 0.5)


def test_mass_conserved_per_step():
    med = PeriodicMedium.from_descriptor(dict(HET_2D, advection={"kind": "zero"}))
    g = periodic_grid((1, 1), 32)
    nl = inert(med.cell)
    u = np.zeros(g.nodes)
    u[5, 7] = 1.0 / np.prod(g.spacing)
    st_ = state(u, g)
    stepper = Stepper(med, nl, g)
    dt = stepper.dt_max
    mass0 = st_.u.sum() * np.prod(g.spacing)
    nl_wide = Nonlinearity("ignition", nl.rate, nl.shape, theta=0.5, upper=2000.0)
    for _ in range(20):
        new = step(st_, med, nl_wide, dt, Stepper(med, nl_wide, g))
        mass = new.u.sum() * np.prod(g.spacing)
        assert abs(mass - mass0) <= 1e-12
        st_ = new


def test_reaction_only_euler(line_medium):
    g = periodic_grid((1,), 16)
    nl = make_kpp(1.0, line_medium.cell)
    dt = Stepper(line_medium, nl, g).dt_max
    out = step(state(np.full(16, 0.1), g), line_medium, nl, dt)
    assert np.max(np.abs(out.u - (0.1 + dt * 0.1 * 0.9))) <= 1e-14


def test_steady_states_are_fixed_points():
    med = PeriodicMedium.from_descriptor(HET_2D)
    g = periodic_grid((1, 1), 32)
    kpp = make_kpp({"kind": "cosine", "mean": 1.0, "amplitude": 0.5}, med.cell)
    ign = make_ignition(0.3, 1.0, med.cell)
    for nl, value in ((kpp, 0.0), (kpp, 1.0), (ign, 0.3), (ign, 0.0), (ign, 1.0)):
        res = run(med, nl, np.full(g.nodes, value), g, 1.0)
        assert np.all(res.state.u == value)


def test_ignition_below_threshold_stays(line_medium):
    g = periodic_grid((3,))
    res = run(line_medium, make_ignition(0.3, 1.0, line_medium.cell), np.full(g.nodes, 0.2), g, 5.0)
    assert np.all(res.state.u == 0.2)


def test_uniform_drift_translates_bump():
    med = PeriodicMedium.from_descriptor({"cell": [1.0], "resolution": 16,
                                          "advection": {"kind": "constant", "velocity": [1.0]}},
                                         allow_nonzero_mean=True)
    g = GridSpec((0.0,), (60.0,), (1200,), ("periodic",))
    x = g.coordinates()[..., 0]
    u0 = 0.5 * np.exp(-((x - 40.0) ** 2))
    nl = inert(med.cell)
    T = 8.0
    res = run(med, nl, u0, g, T)
    # u_t = u_x moves data toward -x at unit speed
    shift = (np.sum(x * u0) - np.sum(x * res.state.u)) / np.sum(u0)
    assert shift / T == pytest.approx(1.0, rel=0.05)


def test_periodicity_transport():
    med = PeriodicMedium.from_descriptor(HET_2D)
    g = periodic_grid((2, 2), 16)
    x = g.coordinates()
    u0 = 0.4 + 0.3 * np.sin(2 * np.pi * x[..., 0]) * np.cos(2 * np.pi * x[..., 1])
    res = run(med, make_kpp(1.0, med.cell), u0, g, 2.0)
    u = res.state.u
    assert np.max(np.abs(u[:16] - u[16:])) <= 1e-10
    assert np.max(np.abs(u[:, :16] - u[:, 16:])) <= 1e-10


def test_dt_limits_enforced(line_medium):
    g = periodic_grid((1,), 16)
    nl = make_kpp(1.0, line_medium.cell)
    stepper = Stepper(line_medium, nl, g)
    assert stepper.dt_diffusion == pytest.approx(0.2 / 16 ** 2)
    with pytest.raises(StabilityError, match="diffusion"):
        step(state(np.zeros(16), g), line_medium, nl, 2 * stepper.dt_diffusion)
    with pytest.raises(StabilityError):
        step(state(np.zeros(16), g), line_medium, nl, 0.0)


def test_advection_cfl_enforced():
    med = PeriodicMedium.from_descriptor({"cell": [1.0, 1.0], "resolution": 16,
                                          "advection": {"kind": "cellular", "amplitude": 200.0}})
    g = periodic_grid((1, 1), 16)
    s = Stepper(med, make_kpp(1.0, med.cell), g)
    assert s.dt_cfl < s.dt_diffusion
    with pytest.raises(StabilityError, match="CFL"):
        step(state(np.zeros(g.nodes), g), med, make_kpp(1.0, med.cell), s.dt_diffusion)


def test_nan_and_range_guard(line_medium):
    g = periodic_grid((1,), 16)
    nl = make_kpp(1.0, line_medium.cell)
    dt = Stepper(line_medium, nl, g).dt_max
    u = np.zeros(16)
    u[3] = np.nan
    with pytest.raises(NumericalError, match="step 1"):
        step(state(u, g), line_medium, nl, dt)
    with pytest.raises(RangeGuardError):
        run(line_medium, nl, np.full(16, -0.5), g, 1.0)


def test_run_requires_resolved_cell(line_medium):
    g = GridSpec((0.0,), (4.0,), (33,), ("noflux",))   # h = 1/8
    with pytest.raises(ConfigError, match="16 nodes"):
        run(line_medium, make_kpp(1.0, line_medium.cell), np.zeros(33), g, 1.0)
    with pytest.raises(ConfigError):
        run(line_medium, make_kpp(1.0, line_medium.cell), np.zeros(33), g, 0.0)


def test_observer_cadence(line_medium):
    g = periodic_grid((2,))
    rec = Recorder()
    res = run(line_medium, make_kpp(1.0, line_medium.cell), np.full(g.nodes, 0.3), g, 2.0, [rec],
              cadence=0.5)
    assert np.allclose(rec.times, [0.0, 0.5, 1.0, 1.5, 2.0], rtol=0, atol=1e-12)
    assert res.state.t == pytest.approx(2.0, abs=1e-12)


def test_identical_inits_stay_identical(line_medium):
    g = periodic_grid((4,))
    init = InitialData("planar", Direction((1.0,)), 1.0, 1.0, 0.9)
    rep = comparison_run(line_medium, make_kpp(1.0, line_medium.cell), init, init, g, 3.0)
    assert rep.min_difference == 0.0 and rep.ordered


def test_zero_lower_stays_zero(line_medium):
    g = periodic_grid((4,))
    hi = InitialData("planar", Direction((1.0,)), 1.0, 1.0, 0.9)
    rep = comparison_run(line_medium, make_kpp(1.0, line_medium.cell), np.zeros(g.nodes), hi, g, 3.0)
    assert rep.ordered and rep.min_difference >= 0.0


def test_shifted_planar_data_ordered():
    med = PeriodicMedium.from_descriptor({"cell": [1.0], "resolution": 32,
                                          "diffusion": {"kind": "cosine_tensor", "amplitude": 0.5}})
    n = Direction((1.0,))
    plan = plan_grid(med, n, 1 / 16, 10.0, 20.0)
    nl = make_kpp({"kind": "cosine", "mean": 1.0, "amplitude": 0.5}, med.cell)
    lo = InitialData("planar", n, 0.0, 5.0, 0.9)
    hi = InitialData("planar", n, 3.0, 5.0, 0.9)
    rep = comparison_run(med, nl, lo, hi, plan.grid, 5.0)
    assert rep.min_difference >= -1e-8


def test_comparison_rejects_unordered(line_medium):
    g = periodic_grid((1,))
    with pytest.raises(ConfigError):
        comparison_run(line_medium, make_kpp(1.0, line_medium.cell), np.full(16, 0.5),
                       np.full(16, 0.4), g, 1.0)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1), eta=st.floats(0.01, 0.5))
def test_range_guard_quiet_in_theorem_regime(seed, eta):
    med = PeriodicMedium.from_descriptor(HET_2D)
    g = periodic_grid((1, 1), 16)
    rng = np.random.default_rng(seed)
    u0 = rng.uniform(0.0, 1.0 - eta, g.nodes)
    for nl in (make_kpp(1.0, med.cell), make_ignition(0.3, 1.0, med.cell)):
        res = run(med, nl, u0, g, 0.5)
        assert res.state.u.min() >= 0.0 and res.state.u.max() <= 1.0


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1))
def test_random_ordered_pairs_stay_ordered(seed):
    med = PeriodicMedium.from_descriptor(HET_2D)
    g = periodic_grid((1, 1), 16)
    rng = np.random.default_rng(seed)
    lo = rng.uniform(0.0, 0.8, g.nodes)
    hi = np.minimum(lo + rng.uniform(0.0, 0.3, g.nodes) * (rng.random(g.nodes) < 0.5), 1.0)
    rep = comparison_run(med, make_kpp(1.0, med.cell), lo, hi, g, 0.5)
    assert rep.min_difference >= -1e-8


def test_plan_kinds():
    med = PeriodicMedium.homogeneous(2, None, 1.0, 16)
    nl = make_kpp(1.0, med.cell)
    c = speed_bound(med, nl)
    assert plan_grid(med, Direction.from_angle(0.0), 0.25, 5, 10, c, 1.0).kind == "strip"
    diag = plan_grid(med, Direction.from_angle(math.pi / 4), 0.25, 5, 10, c, 1.0)
    assert diag.kind == "strip" and diag.grid.twist[1] != 0
    assert orthogonal_lattice_vector(med, Direction.from_angle(math.atan(math.sqrt(2)))) is None
    rect = plan_grid(med, Direction.from_angle(math.atan(math.sqrt(2))), 0.25, 5, 10, c, 1.0)
    assert rect.kind == "rectangle"
    assert rect.safe_mask(0.0).all() and not rect.safe_mask(1.0).all()
    line = plan_grid(PeriodicMedium.homogeneous(1), Direction((-1.0,)), 0.1, 5, 10)
    assert line.kind == "line" and line.s.min() == pytest.approx(-5.0, abs=0.1)


def test_speed_bound_kpp_closed_form():
    med = PeriodicMedium.homogeneous(1, None, 1.0, 16)
    # a2 lam^2 = M with M = 1 gives lam = 1 and bound 2
    assert speed_bound(med, make_kpp(1.0, med.cell)) == pytest.approx(2.0, rel=1e-3)


def test_twisted_strip_keeps_planar_symmetry():
    med = PeriodicMedium.homogeneous(2, None, 1.0, 16)
    n = Direction.from_angle(math.pi / 4)
    plan = plan_grid(med, n, 1 / 16, 12.0, 12.0)
    nl = make_kpp(1.0, med.cell)
    res = run(med, nl, InitialData("planar", n, 0.0, 2.0, 0.9), plan.grid, 1.0)
    s = np.round(plan.s / (1 / 16 / math.sqrt(2))).astype(int)
    u = res.state.u
    inner = (plan.s > -2.0) & (plan.s < 3.0)
    for val in np.unique(s[inner]):
        sel = inner & (s == val)
        assert np.ptp(u[sel]) <= 1e-12
