"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Tolerances are fixed constants below.  Expensive runs are shared through
module-scoped fixtures so each simulation happens once.
"""
import math
import time

import numpy as np
import pytest

import oracles
from frontspeed.core import (Direction, GridSpec, PeriodicMedium, directions_on_circle,
                             sample_field)
from frontspeed.eigen import EigenCurve, EigenOperatorSpec, linear_speed, principal_eigenpair
from frontspeed.fronts import extract_profile, measure_speed
from frontspeed.nonlinearity import make_ignition, make_kpp
from frontspeed.simulate import InitialData, comparison_run
from frontspeed.studies import continuity_report, ignition_approx_study, scan_directions
from frontspeed.validate import (check_supersolution, choose_lambda, make_supersolution,
                                 uniform_spreading_check)

pytestmark = pytest.mark.slow

E1 = Direction((1.0,))

CLIN_TOL = 1e-3                  # criteria 1 and 4
CLIN_RUNTIME = 10.0
SIM_SPEED_REL = 0.02             # criterion 2
SIM_RUNTIME = 60.0
CROSS_REL = 0.03                 # criterion 3
CROSS_RUNTIME = 300.0
APPROX_EPS = [0.2, 0.1, 0.05]    # criterion 5
APPROX_GAP = 0.05
APPROX_RUNTIME = 900.0
ORDER_TOL = -1e-8                # criterion 6
N_PAIRS = 50
PULSATING_TOL = 0.02             # criterion 8
ISO_RATIO = 1.25                 # criterion 9
ANISO_RATIO = 4.0
MU0_TOL = 1e-8                   # criterion 10

HET_RATE = {"kind": "cosine", "mean": 1.0, "amplitude": 0.5}
ANISO = [[1.0, 0.0], [0.0, 4.0]]


@pytest.fixture
def report(capsys):
    def emit(label: str, ok: bool, detail: str) -> bool:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {label}: {detail}")
        return ok
    return emit


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_c1_homogeneous_linear_speed(report):
    med = PeriodicMedium.homogeneous(2, None, 1.0, 128)
    nl = make_kpp(1.0, med.cell)
    res, secs = timed(lambda: [linear_speed(med, nl, n) for n in directions_on_circle(8)])
    err = max(abs(r.c_lin - oracles.kpp_speed()) for r in res)
    ok = err <= CLIN_TOL and secs <= CLIN_RUNTIME
    assert report("1", ok, f"max |c_lin - 2| = {err:.2e} over 8 directions, {secs:.1f} s")


def test_c2_homogeneous_simulated_speed(report):
    med = PeriodicMedium.homogeneous(1, None, 1.0, 64)
    m, secs = timed(lambda: measure_speed(med, make_kpp(1.0, med.cell), E1, t_end=40, h=0.05))
    rel = abs(m.speed - oracles.kpp_speed()) / oracles.kpp_speed()
    ok = rel <= SIM_SPEED_REL and secs <= SIM_RUNTIME
    assert report("2", ok, f"c = {m.speed:.5f} (rel error {rel:.2%}), {secs:.1f} s")


@pytest.fixture(scope="module")
def heterogeneous_line():
    med = PeriodicMedium.homogeneous(1, None, 1.0, 128)
    nl = make_kpp(HET_RATE, med.cell)
    t0 = time.perf_counter()
    lin = linear_speed(med, nl, E1)
    m = measure_speed(med, nl, E1, t_end=40, h=0.05, keep_states=True)
    return med, lin, m, time.perf_counter() - t0


def test_c3_eigen_versus_simulation(report, heterogeneous_line):
    _, lin, m, secs = heterogeneous_line
    rel = abs(m.speed - lin.c_lin) / lin.c_lin
    oracle = oracles.heterogeneous_kpp_clin(0.5)
    ok = rel <= CROSS_REL and secs <= CROSS_RUNTIME and abs(lin.c_lin - oracle) <= CLIN_TOL
    assert report("3", ok, f"c_sim = {m.speed:.5f}, c_lin = {lin.c_lin:.5f} "
                           f"(spectral oracle {oracle:.5f}), gap {rel:.2%}, {secs:.1f} s")


def test_c4_anisotropic_continuity(report):
    med = PeriodicMedium.homogeneous(2, ANISO, 1.0, 16)
    nl = make_kpp(1.0, med.cell)
    coarse = scan_directions(med, nl, "eigen_lin", 16)
    fine = scan_directions(med, nl, "eigen_lin", 32)
    rep = continuity_report(coarse, fine)
    e1 = abs(coarse.at(0.0).c - 2.0)
    e2 = abs(coarse.at(math.pi / 2).c - 4.0)
    ok = rep.passed and e1 <= CLIN_TOL and e2 <= CLIN_TOL
    assert report("4", ok, f"continuity gate {'met' if rep.passed else 'missed'}, "
                           f"|c(e1) - 2| = {e1:.1e}, |c(e2) - 4| = {e2:.1e}")


@pytest.fixture(scope="module")
def approx_table():
    med = PeriodicMedium.homogeneous(2, None, 2.0, 16)
    base = make_kpp(1.0, med.cell)
    return timed(lambda: ignition_approx_study(med, base, directions_on_circle(8), APPROX_EPS,
                                               sim={"t_end": 30.0, "h": 0.125}))


def test_c5a_approx_below_kpp_speed(report, approx_table):
    tab, secs = approx_table
    worst = max(c.c - (2.0 + c.uncertainty) for row in tab.cells for c in row)
    ok = worst <= 0.0 and not tab.above_reference and secs <= APPROX_RUNTIME
    assert report("5a", ok, f"max c_eps - (2 + fit tol) = {worst:.3f}, {secs:.0f} s")


def test_c5b_approx_monotone_in_eps(report, approx_table):
    tab, _ = approx_table
    worst = 0.0
    for row in tab.cells:
        for a, b in zip(row, row[1:]):             # eps decreasing along the row
            worst = max(worst, (a.c - b.c) - 2.0 * max(a.uncertainty, b.uncertainty))
    ok = worst <= 0.0 and not tab.monotonicity_violations
    assert report("5b", ok, f"largest drop beyond 2x fit uncertainty = {worst:.2e}")


def test_c5c_approx_gap_shrinks_to_five_percent(report, approx_table):
    tab, _ = approx_table
    gaps = tab.relative_sup_gap
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    shooting = oracles.ignition_approx_speed(APPROX_EPS[-1])
    ok = decreasing and gaps[-1] <= APPROX_GAP
    assert report("5c", ok, "relative sup gaps " + ", ".join(f"{g:.1%}" for g in gaps)
                  + f"; strictly decreasing: {decreasing}; 1D shooting speed at eps=0.05 is "
                  f"{shooting:.4f}, a {1 - shooting / 2:.1%} gap")


def test_c6_discrete_comparison(report):
    med = PeriodicMedium.from_descriptor({
        "cell": [1.0, 1.0], "resolution": 32,
        "diffusion": {"kind": "cosine_tensor", "amplitude": 0.5, "diag": [1.0, 2.0]},
        "advection": {"kind": "cellular", "amplitude": 1.0}})
    g = GridSpec((0.0, 0.0), (2.0, 2.0), (32, 32), ("periodic", "periodic"))
    rng = np.random.default_rng(20240601)
    worst = math.inf
    for k in range(N_PAIRS):
        nl = make_kpp(1.0, med.cell) if k % 2 == 0 else make_ignition(0.3, 1.0, med.cell)
        lo = rng.uniform(0.0, 0.9, g.nodes)
        bump = rng.uniform(0.0, 0.4, g.nodes) * (rng.random(g.nodes) < 0.5)
        hi = np.minimum(lo + bump, 1.0)
        if k % 5 == 0:
            n = Direction.from_angle(rng.uniform(0, 2 * math.pi))
            lo = InitialData("planar", n, 0.5, 2.0, 0.9).on(g)
            hi = np.maximum(lo, InitialData("planar", n, 1.5, 2.0, 0.9).on(g))
        rep = comparison_run(med, nl, lo, hi, g, 1.0)
        worst = min(worst, rep.min_difference)
    ok = worst >= ORDER_TOL
    assert report("6", ok, f"min over {N_PAIRS} pairs of (u_high - u_low) = {worst:.2e}")


def test_c7_supersolution_certificate(report):
    med = PeriodicMedium.homogeneous(2, None, 1.0, 16)
    nl = make_ignition(0.3, 1.0, med.cell)
    lam = choose_lambda(med, nl)
    spec = make_supersolution(med, nl, lam)
    checks = [check_supersolution(spec, n) for n in directions_on_circle(16)]
    worst = min(c.min_residual for c in checks)
    bad = make_supersolution(med, nl, lam / 2)
    neg = min(check_supersolution(bad, n, require_valid=False).min_residual
              for n in directions_on_circle(16))
    ok = all(c.passed for c in checks) and neg < 0
    assert report("7", ok, f"lambda = {lam:.4f}, min residual {worst:.2e} over 16 directions; "
                           f"lambda/2 control min residual {neg:.2e}")


def test_c8_pulsating_relation(report, heterogeneous_line):
    med, _, m, _ = heterogeneous_line
    prof = extract_profile(m.states, E1, m.speed, med.cell, trace=m.trace, boundary_margin=20)
    ok = prof.pulsating_residual <= PULSATING_TOL
    assert report("8", ok, f"max |u(t + L/c, x + L) - u(t, x)| = {prof.pulsating_residual:.2e}")


def test_c9_uniform_spreading(report):
    dirs = directions_on_circle(8)
    iso = PeriodicMedium.homogeneous(2, None, 4.0, 16)
    r_iso = uniform_spreading_check(iso, make_kpp(1.0, iso.cell), dirs, [2.0] * 8, 0.4, 0.05,
                                    t_end=60.0, h=0.25, gate=ISO_RATIO)
    aniso = PeriodicMedium.homogeneous(2, ANISO, 8.0, 16)
    refs = [oracles.anisotropic_kpp_speed(d.angle, 1.0, 4.0) for d in dirs]
    r_an = uniform_spreading_check(aniso, make_kpp(1.0, aniso.cell), dirs, refs, 0.4, 0.05,
                                   t_end=120.0, h=0.5, gate=ANISO_RATIO)
    ok = (r_iso.all_finite and r_iso.ratio <= ISO_RATIO
          and r_an.all_finite and r_an.ratio <= ANISO_RATIO)
    fmt = lambda r: "nan" if r.ratio is None else f"{r.ratio:.3f}"   # noqa: E731
    assert report("9", ok, f"isotropic tau ratio {fmt(r_iso)} (taus {r_iso.taus}); "
                           f"anisotropic ratio {fmt(r_an)} (taus {r_an.taus})")


def test_c10_eigen_structure(report):
    media = [
        PeriodicMedium.from_descriptor({"cell": [1.0, 1.0], "resolution": 32,
                                        "diffusion": {"kind": "cosine_tensor", "amplitude": 0.5}}),
        PeriodicMedium.from_descriptor({"cell": [1.0, 1.0], "resolution": 32,
                                        "advection": {"kind": "cellular", "amplitude": 1.5}}),
        PeriodicMedium.from_descriptor({"cell": [1.0, 2.0], "resolution": [32, 32],
                                        "diffusion": {"kind": "constant",
                                                      "matrix": [[2.0, 0.5], [0.5, 1.0]]},
                                        "advection": {"kind": "shear", "amplitude": 1.0}}),
    ]
    zero = max(abs(principal_eigenpair(EigenOperatorSpec(med, n, 0.0)).mu0)
               for med in media for n in directions_on_circle(8))

    mixed = PeriodicMedium.from_descriptor({
        "cell": [1.0, 1.0], "resolution": 32,
        "diffusion": {"kind": "cosine_tensor", "amplitude": 0.4, "axis": 1},
        "advection": {"kind": "cellular", "amplitude": 1.0}})

    def potential(mean, amp):
        return sample_field({"kind": "cosine", "mean": mean, "amplitude": amp}, mixed.cell, 32,
                            "scalar")

    concave_gap = math.inf
    lams = (0.25, 0.5, 1.0, 2.0)
    for n in directions_on_circle(8):
        curve = EigenCurve(mixed, n, potential=potential(1.0, 0.5))
        mu = {lam: curve.mu0(lam) for lam in lams}
        for i, l1 in enumerate(lams):
            for l2 in lams[i + 1:]:
                concave_gap = min(concave_gap,
                                  curve.mu0(0.5 * (l1 + l2)) - 0.5 * (mu[l1] + mu[l2]))

    mono_gap = math.inf
    rng = np.random.default_rng(7)
    for _ in range(12):
        lam, bump, amp = rng.uniform(0, 3), rng.uniform(0, 1), rng.uniform(0, 0.9)
        n = Direction.from_angle(rng.uniform(0, 2 * math.pi))
        mu1 = principal_eigenpair(EigenOperatorSpec(mixed, n, lam, potential=potential(1.0, amp),
                                                    resolution=16)).mu0
        mu2 = principal_eigenpair(EigenOperatorSpec(
            mixed, n, lam, potential=potential(1.0 + bump, amp * (1.0 + bump)),
            resolution=16)).mu0
        mono_gap = min(mono_gap, mu1 - mu2)

    ok = zero <= MU0_TOL and concave_gap >= -1e-6 and mono_gap >= -1e-10
    assert report("10", ok, f"max |mu0(n, 0)| = {zero:.1e}; worst midpoint concavity gap "
                            f"{concave_gap:.2e}; worst potential-order gap {mono_gap:.2e}")
