"""Supersolution certificates, uniform spreading and ignition lower bounds.

The exponential barrier is v(t, x) = min{1, theta + C exp(-lam (x.n - 2 a lam t))}.
Where v < 1 its residual is

    v_t - div(A grad v) - q.grad v - f(x, v)
        = (v - theta) [2 a lam^2 - lam^2 n.An + lam div(An) + lam q.n] - f(x, v),

which is nonnegative once a lam^2 - lam (|div(An)| + |q.n|) - M > 0 and
a >= n.An for every n, i.e. a = a2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Direction, PeriodicMedium, directions_on_circle
from .errors import ConfigError
from .fronts import default_spacing
from .nonlinearity import Nonlinearity, make_ignition_approx
from .simulate import (GridPlan, InitialData, Recorder, Stepper, _guard, plan_grid,
                       run, speed_bound)
from .studies import parallel_map

LAMBDA_FLOOR = 1e-3
LAMBDA_CEIL = 1e6


def _direction_norms(medium: PeriodicMedium, n: Direction) -> tuple[float, float]:
    """(sup |div(A n)|, sup |q.n|) sampled on the cell grid."""
    x = medium.cell.cell_grid(medium.resolution).coordinates()
    v = n.vector
    div_an = float(np.max(np.abs(medium.A.divergence_at(x) @ v)))
    qn = float(np.max(np.abs(medium.q.values_at(x) @ v)))
    return div_an, qn


def barrier_margin(lam: float, a: float, div_an: float, qn: float, M: float) -> float:
    return a * lam * lam - lam * div_an - lam * qn - M


@dataclass(frozen=True, eq=False)
class SupersolutionSpec:
    """Exponential barrier data.

    ``a`` is the diffusion constant in the barrier speed 2 a lam; it must
    dominate n.An for every direction, so a2 of the medium is used.
    """
    theta: float
    C: float
    lam: float
    a: float
    medium: PeriodicMedium
    nonlinearity: Nonlinearity
    directions: tuple[Direction, ...] = ()

    @property
    def M(self) -> float:
        return self.nonlinearity.lipschitz_M

    def margins(self) -> list[float]:
        dirs = self.directions or tuple(directions_on_circle(16, self.medium.dim))
        return [barrier_margin(self.lam, self.a, *_direction_norms(self.medium, n), self.M)
                for n in dirs]

    @property
    def valid(self) -> bool:
        return self.a >= self.medium.a2 - 1e-14 and min(self.margins()) > 0

    def v(self, t, s):
        """Barrier value as a function of time and s = x.n."""
        return np.minimum(1.0, self.theta + self.C * np.exp(-self.lam * (s - 2 * self.a * self.lam * t)))


def choose_lambda(medium: PeriodicMedium, nl: Nonlinearity, n_directions: int = 16,
                  margin: float = 1.1) -> float:
    """Smallest barrier exponent valid for all sampled directions, times a 10% margin.

    Doubling from 1e-3 brackets the threshold of
    a2 lam^2 - lam (|div(An)| + |q.n|) - M > 0 (worst direction), bisection
    refines it.  Returns 1e-3 if the inequality already holds there.
    """
    if not nl.is_ignition:
        raise ConfigError("the barrier exponent is defined for ignition-type reactions")
    M = nl.lipschitz_M
    if not math.isfinite(M):
        raise ConfigError("the reaction has no finite Lipschitz ratio")
    norms = [_direction_norms(medium, n) for n in directions_on_circle(n_directions, medium.dim)]
    a = medium.a2

    def holds(lam):
        return min(barrier_margin(lam, a, d, q, M) for d, q in norms) > 0

    lo = LAMBDA_FLOOR
    if holds(lo):
        return lo
    hi = lo
    while not holds(hi):
        lo, hi = hi, 2 * hi
        if hi > LAMBDA_CEIL:
            raise ConfigError(f"no barrier exponent below {LAMBDA_CEIL:g}; medium bounds inconsistent")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-13 * hi:
            break
    return margin * hi


def make_supersolution(medium: PeriodicMedium, nl: Nonlinearity, lam: float | None = None,
                       c_init: float = 0.0, directions=None) -> SupersolutionSpec:
    """Barrier with C = (1 + theta) exp(lam * c_init), lying above planar data vanishing past c_init."""
    lam = choose_lambda(medium, nl) if lam is None else lam
    C = (1.0 + nl.theta) * math.exp(lam * c_init)
    return SupersolutionSpec(nl.theta, C, lam, medium.a2, medium, nl,
                             tuple(directions) if directions else ())


@dataclass
class SupersolutionReport:
    direction: Direction
    lam: float
    min_residual: float
    scale: float
    active_points: int
    passed: bool
    samples: list = field(default_factory=list)   # (t, s, cell index, residual)


def supersolution_residual(spec: SupersolutionSpec, n: Direction, t, x):
    """Closed-form residual of the barrier at times t (broadcast) and points x."""
    med, nl = spec.medium, spec.nonlinearity
    nv = n.vector
    A = med.A.values_at(x)
    An = A @ nv
    nAn = An @ nv
    divAn = med.A.divergence_at(x) @ nv
    qn = med.q.values_at(x) @ nv
    s = x @ nv
    lam, a = spec.lam, spec.a
    v = spec.v(t, s)
    coef = 2 * a * lam * lam - lam * lam * nAn + lam * divAn + lam * qn
    r = nl.f(v, nl.rate.values_at(x))
    res = np.where(v < 1.0, (v - spec.theta) * coef - r, -r)
    scale = np.maximum(np.abs((v - spec.theta) * coef), np.abs(r))
    return res, v, scale


def check_supersolution(spec: SupersolutionSpec, n: Direction, t_window=(0.0, 5.0),
                        n_times: int = 11, s_span: float = 30.0, n_shifts: int = 121,
                        resolution=None, require_valid: bool = True,
                        keep_samples: bool = False) -> SupersolutionReport:
    """Residual of the barrier on cell-grid points swept along n and over t_window.

    For every time the sweep covers x.n from the edge of {v = 1} to s_span
    beyond it, where v - theta has decayed by exp(-lam s_span).
    """
    if require_valid and not spec.valid:
        raise ConfigError("barrier exponent violates a lam^2 - lam(|div An| + |q.n|) - M > 0")
    med = spec.medium
    res_cell = resolution or med.resolution
    X = med.cell.cell_grid(res_cell).coordinates().reshape(-1, med.dim)
    nv = n.vector
    worst, worst_scale, active = math.inf, 0.0, 0
    samples = []
    edge0 = math.log(spec.C / (1.0 - spec.theta)) / spec.lam
    for t in np.linspace(t_window[0], t_window[1], n_times):
        edge = edge0 + 2 * spec.a * spec.lam * t
        X_s = X @ nv
        for shift in np.linspace(edge - 2.0, edge + s_span, n_shifts):
            x = X + (shift - 0.0) * nv
            res, v, scale = supersolution_residual(spec, n, t, x)
            act = v < 1.0
            active += int(act.sum())
            if act.any():
                i = int(np.argmin(np.where(act, res, np.inf)))
                if res[i] < worst:
                    worst, worst_scale = float(res[i]), float(scale[i])
            if keep_samples:
                samples.extend((float(t), float(s), j, float(r))
                               for j, (s, r) in enumerate(zip(X_s + shift, res)))
    scale = max(worst_scale, 1.0)
    passed = worst >= -1e-8 * scale
    return SupersolutionReport(n, spec.lam, worst, scale, active, bool(passed), samples)


# ---------------------------------------------------------------------------
# uniform spreading

def spreading_time(states, plan: GridPlan, c_ref: float, alpha: float, delta: float):
    """First snapshot time after which both spreading conclusions hold through the end.

    Conclusion 1: u >= 1 - delta on {x.n <= (c - alpha) t};
    conclusion 2: u <= delta on {x.n >= (c + alpha) t}.
    Returns (tau or None, inconclusive flag).
    """
    s = plan.s
    ok_flags = []
    inconclusive = False
    for st in states:
        mask = plan.safe_mask(st.t) if plan.kind == "rectangle" else None
        behind = s <= (c_ref - alpha) * st.t
        ahead = s >= (c_ref + alpha) * st.t
        if mask is not None:
            if not (behind & mask).any() or not (ahead & mask).any():
                inconclusive = True
            behind &= mask
            ahead &= mask
        c1 = not behind.any() or float(st.u[behind].min()) >= 1.0 - delta
        c2 = not ahead.any() or float(st.u[ahead].max()) <= delta
        ok_flags.append(c1 and c2)
    tau = None
    for k in range(len(states) - 1, -1, -1):
        if not ok_flags[k]:
            break
        tau = states[k].t
    return tau, inconclusive


@dataclass
class SpreadingReport:
    alpha: float
    delta: float
    angles: list[float]
    references: list[float]
    taus: list[float | None]
    inconclusive: list[bool]
    gate: float
    t_end: float

    @property
    def all_finite(self) -> bool:
        return all(t is not None for t in self.taus)

    @property
    def max_tau(self) -> float:
        return max((t for t in self.taus if t is not None), default=math.nan)

    @property
    def min_tau(self) -> float:
        return min((t for t in self.taus if t is not None), default=math.nan)

    @property
    def ratio(self) -> float:
        if not self.all_finite:
            return math.inf
        lo = self.min_tau
        return self.max_tau / lo if lo > 0 else math.inf

    @property
    def passed(self) -> bool:
        return self.all_finite and self.ratio <= self.gate

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "delta": self.delta, "t_end": self.t_end, "gate": self.gate,
                "directions": [{"angle": a, "reference": c, "tau": t, "inconclusive": i}
                               for a, c, t, i in zip(self.angles, self.references, self.taus,
                                                     self.inconclusive)],
                "max_tau": self.max_tau, "min_tau": self.min_tau,
                "ratio": None if not math.isfinite(self.ratio) else self.ratio,
                "passed": self.passed}


def spreading_run(medium: PeriodicMedium, nl: Nonlinearity, n: Direction, c_ref: float,
                  alpha: float, t_end: float, h: float | None = None, C: float = 0.0,
                  K: float = 5.0, mu: float = 0.9, cadence: float = 0.5):
    """Simulate planar data along n on a grid covering x.n up to (c + alpha) t_end."""
    h = h or default_spacing(medium.cell)
    ahead = max(C, (c_ref + alpha) * t_end) + 15.0
    c_bound = speed_bound(medium, nl)
    plan = plan_grid(medium, n, h, K + 15.0, ahead, c_bound, t_end)
    rec = Recorder()
    init = InitialData("planar", n, C, K, mu, nl.lower)
    run(medium, nl, init, plan.grid, t_end, [rec], cadence=cadence)
    return plan, rec.states


def uniform_spreading_check(medium: PeriodicMedium, nl: Nonlinearity, directions, references,
                            alpha: float, delta: float, t_end: float = 40.0,
                            h: float | None = None, C: float = 0.0, K: float = 5.0,
                            mu: float = 0.9, gate: float = 4.0, threads: int = 1,
                            cadence: float = 0.5) -> SpreadingReport:
    """Per-direction spreading times tau_n from one family of planar data (same C, K, mu)."""
    if not (alpha > 0 and 0 < delta < 1):
        raise ConfigError("need alpha > 0 and 0 < delta < 1")
    directions = list(directions)
    references = [float(c) for c in references]
    if len(references) != len(directions):
        raise ConfigError("one reference speed per direction is required")

    def work(i):
        plan, states = spreading_run(medium, nl, directions[i], references[i], alpha, t_end,
                                     h, C, K, mu, cadence)
        return spreading_time(states, plan, references[i], alpha, delta)

    results = parallel_map(work, range(len(directions)), threads)
    return SpreadingReport(alpha, delta, [d.angle for d in directions], references,
                           [r[0] for r in results], [r[1] for r in results], gate, t_end)


# ---------------------------------------------------------------------------
# ignition approximation as a subsolution

@dataclass
class LowerBoundReport:
    eps: float
    direction: Direction
    min_difference: float
    time_of_min: float
    ordered: bool
    reversed: bool
    t_reach: float | None
    snapshots: int

    def to_dict(self) -> dict:
        d = dict(vars(self))
        d["direction"] = list(self.direction.components)
        return d


def ignition_lower_bound_check(medium: PeriodicMedium, base: Nonlinearity, eps: float,
                               n: Direction, t_end: float = 20.0, h: float | None = None,
                               C: float = 0.0, K: float = 5.0, mu: float = 0.9,
                               reverse: bool = False, cadence: float = 0.5,
                               tol: float = 1e-8) -> LowerBoundReport:
    """Run f and f_eps from the same planar data in lockstep and compare.

    Checks u_f >= u_eps - tol at every snapshot (u_eps >= u_f - tol when
    reverse is set, the negative control).  t_reach is the first snapshot
    with u_f >= 1 - eps/2 on {x.n <= -K}.
    """
    low_nl = base if eps == 0 else make_ignition_approx(base, eps)
    h = h or default_spacing(medium.cell)
    c_bound = speed_bound(medium, base)
    plan = plan_grid(medium, n, h, K + 15.0, 1.15 * c_bound * t_end + 15.0, c_bound, t_end)
    grid = plan.grid
    hi_step = Stepper(medium, base, grid)
    lo_step = Stepper(medium, low_nl, grid)
    dt_lim = 0.9 * min(hi_step.dt_max, lo_step.dt_max)
    nsteps = max(1, math.ceil(t_end / dt_lim))
    dt = t_end / nsteps
    every = max(1, int(round(cadence / dt)))
    init = InitialData("planar", n, C, K, mu, 0.0)
    u_hi = init.on(grid).ravel()
    u_lo = u_hi.copy()
    behind = (plan.s <= -K).ravel()
    target = 1.0 - eps / 2.0
    worst, t_worst, t_reach, snaps = math.inf, 0.0, None, 0
    for k in range(0, nsteps + 1):
        if k:
            u_hi, _ = hi_step.step(u_hi, dt)
            u_lo, _ = lo_step.step(u_lo, dt)
        if k % every == 0 or k == nsteps:
            _guard(hi_step, u_hi, k, k * dt)
            _guard(lo_step, u_lo, k, k * dt)
            d = float(np.min(u_lo - u_hi)) if reverse else float(np.min(u_hi - u_lo))
            snaps += 1
            if d < worst:
                worst, t_worst = d, k * dt
            if t_reach is None and float(u_hi[behind].min()) >= target:
                t_reach = k * dt
    return LowerBoundReport(eps, n, worst, t_worst, worst >= -tol, reverse, t_reach, snaps)
