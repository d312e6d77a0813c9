"""Explicit finite-difference solver for the Cauchy problem

    u_t = div(A grad u) + q.grad u + f(x, u)

on 1D lines and 2D strips or rectangles.  Diffusion is in flux form with
face coefficients A_aa(x +- h/2 e_a), advection is upwinded per component
and the reaction is pointwise.  With dt below the monotonicity bound every
update is a convex combination plus a Lipschitz reaction, so the scheme
satisfies a discrete comparison principle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol

import numpy as np

from .core import Direction, GridSpec, PeriodicMedium
from .errors import ConfigError, NumericalError, RangeGuardError, StabilityError
from .nonlinearity import Nonlinearity

DT_SAFETY = 0.9
DEFAULT_CADENCE = 0.5


# ---------------------------------------------------------------------------
# grid planning

@dataclass(frozen=True)
class GridPlan:
    """A grid together with how it sits relative to a propagation direction.

    kind is "line" (1D), "strip" (2D, transversally periodic under a lattice
    vector orthogonal to n, possibly twisted) or "rectangle" (2D no-flux box
    for directions without a short orthogonal lattice vector).
    """
    grid: GridSpec
    direction: Direction
    kind: str
    long_axis: int = 0
    lattice: tuple[float, ...] | None = None
    c_bound: float = 0.0
    safety: float = 2.0

    @property
    def s(self) -> np.ndarray:
        """x.n at every node."""
        return self.grid.coordinates() @ self.direction.vector

    def safe_mask(self, t: float) -> np.ndarray:
        """Nodes not yet reachable by boundary influence at time t.

        Lines and strips have no lateral boundary, so every node is safe.
        """
        if self.kind != "rectangle":
            return np.ones(self.grid.nodes, dtype=bool)
        x = self.grid.coordinates()
        margin = self.safety * self.c_bound * t
        lo = np.array(self.grid.origin)
        hi = lo + np.array(self.grid.extents)
        dist = np.minimum(x - lo, hi - x).min(axis=-1)
        return dist >= margin

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "direction": list(self.direction.components),
                "kind": self.kind, "long_axis": self.long_axis,
                "lattice": None if self.lattice is None else list(self.lattice),
                "c_bound": self.c_bound, "safety": self.safety}


def _snap_range(lo: float, hi: float, h: float) -> tuple[float, int]:
    i0 = math.floor(lo / h + 1e-9)
    i1 = math.ceil(hi / h - 1e-9)
    return i0 * h, i1 - i0 + 1


def orthogonal_lattice_vector(medium: PeriodicMedium, direction: Direction, max_int: int = 8,
                              tol: float = 1e-12):
    """Shortest k = (i L1, j L2), |i|, |j| <= max_int, with k.n = 0 (None if absent)."""
    L = medium.cell.lengths
    n = direction.vector
    best = None
    for i in range(-max_int, max_int + 1):
        for j in range(-max_int, max_int + 1):
            if i == 0 and j == 0:
                continue
            k = np.array([i * L[0], j * L[1]])
            if abs(k @ n) <= tol * np.linalg.norm(k) and (
                    best is None or np.linalg.norm(k) < np.linalg.norm(best) - 1e-12):
                best = k
    return best


def speed_bound(medium: PeriodicMedium, nl: Nonlinearity) -> float:
    """Speed 2 a2 lam of the exponential supersolution, lam its smallest valid exponent.

    lam solves a2 lam^2 - lam (|div A|_inf + |q|_inf) - M = 0, so no level
    set above the threshold can advance faster than the returned value.
    """
    x = medium.cell.cell_grid(medium.resolution).coordinates()
    b = float(np.max(np.linalg.norm(medium.A.divergence_at(x), axis=-1))) + medium.q.sup_norm
    a, M = medium.a2, nl.lipschitz_M
    lam = (b + math.sqrt(b * b + 4 * a * M)) / (2 * a)
    return 2 * a * lam


def plan_grid(medium: PeriodicMedium, direction: Direction, h: float, back: float, ahead: float,
              c_bound: float | None = None, t_end: float = 0.0, safety: float = 2.0,
              max_int: int = 8) -> GridPlan:
    """Grid covering x.n in [-back, ahead] for a front moving along n.

    h must divide the cell lengths.  In 2D a strip is used whenever a short
    lattice vector orthogonal to n exists; otherwise a no-flux rectangle wide
    enough that the measurement line stays outside the boundary-influence
    margin safety * c_bound * t up to t_end.
    """
    dim = medium.dim
    if direction.dim != dim:
        raise ConfigError("direction and medium dimensions differ")
    n = direction.vector
    for L in medium.cell.lengths:
        if abs(L / h - round(L / h)) > 1e-9:
            raise ConfigError(f"spacing {h} does not divide the cell length {L}")
    if dim == 1:
        lo, hi = (-back, ahead) if n[0] > 0 else (-ahead, back)
        x0, nodes = _snap_range(lo, hi, h)
        grid = GridSpec((x0,), ((nodes - 1) * h,), (nodes,), ("noflux",))
        return GridPlan(grid, direction, "line", 0)

    k = orthogonal_lattice_vector(medium, direction, max_int)
    a = int(np.argmax(np.abs(n)))
    b = 1 - a
    if k is not None:
        if k[b] < 0:
            k = -k
        P = float(k[b])
        nb = int(round(P / h))
        twist = int(round(k[a] / h))
        # s = n_a x_a + n_b x_b with x_b in [0, P]
        corners = [(s - n[b] * xb) / n[a] for s in (-back, ahead) for xb in (0.0, P)]
        x0, na = _snap_range(min(corners) - 2 * h, max(corners) + 2 * h, h)
        origin = [0.0, 0.0]
        extents = [0.0, 0.0]
        nodes = [0, 0]
        bc = ["", ""]
        tw = [0, 0]
        origin[a], extents[a], nodes[a], bc[a] = x0, (na - 1) * h, na, "noflux"
        origin[b], extents[b], nodes[b], bc[b] = 0.0, P, nb, "periodic"
        tw[b] = twist
        grid = GridSpec(tuple(origin), tuple(extents), tuple(nodes), tuple(bc), tuple(tw))
        return GridPlan(grid, direction, "strip", a, tuple(float(v) for v in k))

    c = c_bound
    if c is None:
        raise ConfigError("a no-flux rectangle needs a speed bound c_bound")
    half = safety * c * t_end + 2.0
    p = np.array([-n[1], n[0]])
    pts = [s * n + w * p for s in (-back, ahead) for w in (-half, half)]
    pts = np.array(pts)
    pad = safety * c * t_end
    origin, extents, nodes = [], [], []
    for ax in range(2):
        x0, m = _snap_range(pts[:, ax].min() - pad, pts[:, ax].max() + pad, h)
        origin.append(x0)
        extents.append((m - 1) * h)
        nodes.append(m)
    grid = GridSpec(tuple(origin), tuple(extents), tuple(nodes), ("noflux", "noflux"))
    return GridPlan(grid, direction, "rectangle", a, None, float(c), safety)


# ---------------------------------------------------------------------------
# initial data

@dataclass(frozen=True)
class InitialData:
    """Planar ramp, ball or explicit grid values.

    planar: u0 = floor + (mu - floor) * clip((C - x.n) / (C + K), 0, 1),
    which equals floor for x.n >= C and mu for x.n <= -K.
    """
    kind: str = "planar"
    direction: Direction | None = None
    C: float = 0.0
    K: float = 5.0
    mu: float = 0.9
    floor: float = 0.0
    radius: float = 1.0
    center: tuple[float, ...] = ()
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("planar", "ball", "grid"):
            raise ConfigError(f"unknown initial data kind {self.kind!r}")
        if self.kind == "planar":
            if self.direction is None:
                raise ConfigError("planar initial data needs a direction")
            if not self.C + self.K > 0:
                raise ConfigError("planar ramp needs C + K > 0")
        if self.kind == "grid" and self.values is None:
            raise ConfigError("grid initial data needs values")

    def on(self, grid: GridSpec) -> np.ndarray:
        x = grid.coordinates()
        if self.kind == "planar":
            s = x @ self.direction.vector
            ramp = np.clip((self.C - s) / (self.C + self.K), 0.0, 1.0)
            return self.floor + (self.mu - self.floor) * ramp
        if self.kind == "ball":
            c = np.array(self.center or (0.0,) * grid.dim)
            r = np.linalg.norm(x - c, axis=-1)
            return np.where(r <= self.radius, self.mu, self.floor)
        v = np.asarray(self.values, dtype=float)
        if v.shape != grid.nodes:
            raise ConfigError(f"initial values have shape {v.shape}, grid has {grid.nodes}")
        return v.copy()


def planar_defaults(nl: Nonlinearity, direction: Direction, C: float = 0.0,
                    K: float = 5.0) -> InitialData:
    """Planar data with the plateau value used throughout: 0.9 or (1+theta)/2."""
    if nl.kind == "ignition_approx":
        mu = 0.9 * nl.upper
    elif nl.is_ignition:
        mu = (1.0 + nl.theta) / 2.0
    else:
        mu = 0.9
    return InitialData("planar", direction, C, K, mu, nl.lower)


# ---------------------------------------------------------------------------
# stepping

@dataclass
class SimState:
    t: float
    u: np.ndarray
    grid: GridSpec
    step_index: int = 0
    max_dudt: float = 0.0
    cfl_margin: float = float("nan")


class Observer(Protocol):
    def observe(self, state: SimState) -> None: ...


def _neighbors(grid: GridSpec):
    """Flat neighbor indices per axis and side, plus ghost-reflection flags."""
    shape = grid.nodes
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    out = []
    for a in range(grid.dim):
        n = shape[a]
        if grid.bc[a] == "periodic":
            plus = np.roll(idx, -1, axis=a)
            minus = np.roll(idx, 1, axis=a)
            tw = grid.twist[a]
            if tw:
                o = 1 - a
                m = shape[o]
                # u(x_o, x_a + P) = u(x_o - tw h_o, x_a): shift the wrapped row
                sl_last = [slice(None)] * 2
                sl_last[a] = n - 1
                sl_first = [slice(None)] * 2
                sl_first[a] = 0
                j = np.arange(m)
                row_first = np.take(idx, 0, axis=a)
                row_last = np.take(idx, n - 1, axis=a)
                plus[tuple(sl_last)] = row_first[np.clip(j - tw, 0, m - 1)]
                minus[tuple(sl_first)] = row_last[np.clip(j + tw, 0, m - 1)]
            out.append((plus.ravel(), minus.ravel(), None, None))
        else:
            plus = np.roll(idx, -1, axis=a)
            minus = np.roll(idx, 1, axis=a)
            first = [slice(None)] * grid.dim
            last = [slice(None)] * grid.dim
            first[a] = 0
            last[a] = n - 1
            second = [slice(None)] * grid.dim
            before_last = [slice(None)] * grid.dim
            second[a] = 1
            before_last[a] = n - 2
            plus[tuple(last)] = idx[tuple(before_last)]
            minus[tuple(first)] = idx[tuple(second)]
            at_lo = np.zeros(shape, dtype=bool)
            at_hi = np.zeros(shape, dtype=bool)
            at_lo[tuple(first)] = True
            at_hi[tuple(last)] = True
            out.append((plus.ravel(), minus.ravel(), at_lo.ravel(), at_hi.ravel()))
    return out


class Stepper:
    """Precomputed coefficients for repeated explicit steps on one grid."""

    def __init__(self, medium: PeriodicMedium, nl: Nonlinearity, grid: GridSpec):
        if grid.dim != medium.dim:
            raise ConfigError("grid and medium dimensions differ")
        if not medium.A.is_diagonal:
            raise ConfigError("the explicit solver supports diagonal diffusion tensors only")
        self.medium, self.nl, self.grid = medium, nl, grid
        x = grid.coordinates()
        h = grid.spacing
        self.h = h
        self.axes = []
        for a, (plus, minus, at_lo, at_hi) in enumerate(_neighbors(grid)):
            e = np.zeros(grid.dim)
            e[a] = 0.5 * h[a]
            Dp = medium.A.values_at(x + e)[..., a, a].ravel()
            Dm = medium.A.values_at(x - e)[..., a, a].ravel()
            if at_lo is not None:
                # ghost reflection: the missing face mirrors the interior one
                Dm = np.where(at_lo, Dp, Dm)
                Dp = np.where(at_hi, Dm, Dp)
            qa = medium.q.values_at(x)[..., a].ravel()
            self.axes.append((plus, minus, Dp / h[a] ** 2, Dm / h[a] ** 2,
                              np.maximum(qa, 0.0) / h[a], np.minimum(qa, 0.0) / h[a]))
        self.rate = nl.rate.values_at(x).ravel()
        self.q_sup = medium.q.sup_norm
        hmin = min(h)
        self.dt_diffusion = 0.2 * hmin * hmin / (medium.a2 * grid.dim)
        self.dt_cfl = 0.5 * hmin / self.q_sup if self.q_sup > 0 else math.inf
        # keep every update a convex combination (discrete maximum principle)
        diag = sum(Dp + Dm + qp - qm for (_, _, Dp, Dm, qp, qm) in self.axes)
        self.dt_monotone = 0.9 / (float(np.max(diag)) + _reaction_slope(nl))
        self.dt_max = min(self.dt_diffusion, self.dt_cfl, self.dt_monotone)

    def rhs(self, u: np.ndarray) -> np.ndarray:
        out = self.nl.f(u, self.rate)
        for plus, minus, Dp, Dm, qp, qm in self.axes:
            up, um = u[plus], u[minus]
            out = out + Dp * (up - u) + Dm * (um - u) + qp * (up - u) + qm * (u - um)
        return out

    def step(self, u: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
        du = self.rhs(u)
        return u + dt * du, float(np.max(np.abs(du))) if du.size else 0.0


def _reaction_slope(nl: Nonlinearity, nu: int = 2001) -> float:
    """Sampled sup |d/du f| over [lower, upper], the range invariant under the flow."""
    u = np.linspace(nl.lower, nl.upper, nu)
    g = nl.shape(u)
    return float(np.max(np.abs(np.diff(g) / np.diff(u))) * np.max(np.abs(nl.rate.samples)))


def dt_max(medium: PeriodicMedium, nl: Nonlinearity, grid: GridSpec) -> float:
    return Stepper(medium, nl, grid).dt_max


def _check_dt(stepper: Stepper, dt: float):
    if not dt > 0:
        raise StabilityError(f"time step must be positive, got {dt}")
    if dt > stepper.dt_diffusion * (1 + 1e-12):
        raise StabilityError(
            f"dt = {dt:.4g} exceeds the diffusion limit 0.2 h^2/(a2 dim) = {stepper.dt_diffusion:.4g}")
    if dt > stepper.dt_cfl * (1 + 1e-12):
        raise StabilityError(f"dt = {dt:.4g} exceeds the advection CFL limit {stepper.dt_cfl:.4g}")


def _guard(stepper: Stepper, u: np.ndarray, step_index: int, t: float):
    nl = stepper.nl
    lo, hi = float(np.min(u)), float(np.max(u))
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise NumericalError(f"non-finite values after step {step_index} (t = {t:.6g})")
    if lo < nl.lower - 1e-9 or hi > nl.upper + nl.rho:
        raise RangeGuardError(
            f"solution left [{nl.lower}, {nl.upper + nl.rho}] after step {step_index} "
            f"(t = {t:.6g}): min {lo:.6g}, max {hi:.6g}")


def step(state: SimState, medium: PeriodicMedium, nl: Nonlinearity, dt: float,
         stepper: Stepper | None = None) -> SimState:
    """One explicit Euler step; raises before stepping if dt is unstable."""
    stepper = stepper or Stepper(medium, nl, state.grid)
    _check_dt(stepper, dt)
    u, rate = stepper.step(state.u.ravel(), dt)
    k = state.step_index + 1
    t = state.t + dt
    _guard(stepper, u, k, t)
    return SimState(t, u.reshape(state.grid.nodes), state.grid, k, rate,
                    1.0 - dt / stepper.dt_max)


class Recorder:
    """Keeps copies of the observed states (optionally thinned)."""

    def __init__(self, every: int = 1):
        self.every = every
        self.states: list[SimState] = []
        self._count = 0

    def observe(self, state: SimState) -> None:
        if self._count % self.every == 0:
            self.states.append(SimState(state.t, state.u.copy(), state.grid, state.step_index,
                                        state.max_dudt, state.cfl_margin))
        self._count += 1

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])


@dataclass
class RunResult:
    state: SimState
    dt: float
    steps: int
    observers: list = field(default_factory=list)


def _time_step(stepper: Stepper, t_end: float, dt: float | None,
               cadence: float | None = None) -> tuple[float, int]:
    if dt is None:
        limit = DT_SAFETY * stepper.dt_max
        if cadence and cadence <= t_end and abs(t_end / cadence - round(t_end / cadence)) < 1e-9:
            # snapshots land exactly on multiples of the cadence
            per = math.ceil(cadence / limit)
            return cadence / per, per * int(round(t_end / cadence))
        n = max(1, math.ceil(t_end / limit))
        return t_end / n, n
    _check_dt(stepper, dt)
    return dt, max(1, int(round(t_end / dt)))


def run(medium: PeriodicMedium, nl: Nonlinearity, init, grid: GridSpec, t_end: float,
        observers: Iterable[Observer] = (), cadence: float = DEFAULT_CADENCE,
        dt: float | None = None, require_cell_resolution: bool = True) -> RunResult:
    """Step from t = 0 to t_end, calling observers at t = 0 and every ``cadence``.

    The step is 0.9 * dt_max, shrunk slightly so that t_end is hit exactly.
    """
    if not t_end > 0:
        raise ConfigError("t_end must be positive")
    if require_cell_resolution and not grid.resolves_cell(medium.cell):
        raise ConfigError(
            f"grid spacing {grid.spacing} does not resolve the cell {medium.cell.lengths} "
            "with at least 16 nodes per period")
    stepper = Stepper(medium, nl, grid)
    dt, nsteps = _time_step(stepper, t_end, dt, cadence)
    every = max(1, int(round(cadence / dt)))
    u0 = init.on(grid) if isinstance(init, InitialData) else np.asarray(init, dtype=float)
    u = np.array(u0, dtype=float).ravel()
    _guard(stepper, u, 0, 0.0)
    observers = list(observers)
    state = SimState(0.0, u.reshape(grid.nodes), grid, 0, 0.0, 1.0 - dt / stepper.dt_max)
    for ob in observers:
        ob.observe(state)
    rate = 0.0
    for k in range(1, nsteps + 1):
        u, rate = stepper.step(u, dt)
        if k % every == 0 or k == nsteps:
            _guard(stepper, u, k, k * dt)
            state = SimState(k * dt, u.reshape(grid.nodes), grid, k, rate,
                             1.0 - dt / stepper.dt_max)
            for ob in observers:
                ob.observe(state)
    state = SimState(nsteps * dt, u.reshape(grid.nodes), grid, nsteps, rate,
                     1.0 - dt / stepper.dt_max)
    return RunResult(state, dt, nsteps, observers)


@dataclass
class ComparisonReport:
    min_difference: float
    time_of_min: float
    steps: int
    ordered: bool


def comparison_run(medium: PeriodicMedium, nl: Nonlinearity, init_low, init_high, grid: GridSpec,
                   t_end: float, dt: float | None = None, tol: float = 1e-8) -> ComparisonReport:
    """Advance two solutions in lockstep and track min over nodes/times of high - low."""
    stepper = Stepper(medium, nl, grid)
    dt, nsteps = _time_step(stepper, t_end, dt)
    lo = (init_low.on(grid) if isinstance(init_low, InitialData) else np.asarray(init_low)).ravel()
    hi = (init_high.on(grid) if isinstance(init_high, InitialData) else np.asarray(init_high)).ravel()
    lo, hi = lo.astype(float), hi.astype(float)
    if np.any(hi - lo < -tol):
        raise ConfigError("initial data are not ordered")
    worst, t_worst = float(np.min(hi - lo)), 0.0
    for k in range(1, nsteps + 1):
        lo, _ = stepper.step(lo, dt)
        hi, _ = stepper.step(hi, dt)
        d = float(np.min(hi - lo))
        if d < worst:
            worst, t_worst = d, k * dt
    _guard(stepper, lo, nsteps, t_end)
    _guard(stepper, hi, nsteps, t_end)
    return ComparisonReport(worst, t_worst, nsteps, worst >= -tol)
