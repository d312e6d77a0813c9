"""Front positions, speed fits and moving-frame wave profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .core import Direction, GridSpec, PeriodicCell, PeriodicMedium
from .errors import ConfigError, FrontNotFoundError
from .nonlinearity import Nonlinearity
from .simulate import (GridPlan, InitialData, Recorder, SimState, plan_grid, planar_defaults, run,
                       speed_bound)

DEFAULT_LEVEL = 0.5
TRANSIENT_CUT = 0.4
# the leading tail of a pulled front relaxes slowly; profiles use a later window
PROFILE_CUT = 0.7


def _plan_for(grid: GridSpec, direction: Direction) -> GridPlan:
    kind = "line" if grid.dim == 1 else "strip"
    return GridPlan(grid, direction, kind, int(np.argmax(np.abs(direction.vector))))


def front_position(u: np.ndarray, plan: GridPlan, level: float = DEFAULT_LEVEL,
                   mask: np.ndarray | None = None) -> float:
    """max of x.n over {u >= level}, refined by linear interpolation along the long axis.

    Each grid line along the axis most aligned with n contributes its last
    crossing; returns nan when no line has an interior crossing.
    """
    a = plan.long_axis
    s = np.moveaxis(plan.s, a, 0)
    u = np.moveaxis(np.asarray(u).reshape(plan.grid.nodes), a, 0)
    ok = np.ones_like(u, dtype=bool) if mask is None else np.moveaxis(mask, a, 0)
    if plan.direction.vector[a] < 0:
        s, u, ok = s[::-1], u[::-1], ok[::-1]
    s = s.reshape(s.shape[0], -1)
    u = u.reshape(u.shape[0], -1)
    ok = ok.reshape(ok.shape[0], -1)
    above = (u >= level) & ok
    n = u.shape[0]
    best = -math.inf
    for j in range(u.shape[1]):
        hits = np.nonzero(above[:, j])[0]
        if hits.size == 0:
            continue
        i = hits[-1]
        if i + 1 >= n or not ok[i + 1, j]:
            continue
        du = u[i, j] - u[i + 1, j]
        frac = (u[i, j] - level) / du if du > 0 else 0.0
        best = max(best, s[i, j] + frac * (s[i + 1, j] - s[i, j]))
    return best if best > -math.inf else math.nan


class FrontObserver:
    """Records front positions at several levels while a run progresses."""

    def __init__(self, plan: GridPlan, levels=(DEFAULT_LEVEL,)):
        self.plan = plan
        self.levels = tuple(levels)
        self.times: list[float] = []
        self.positions: dict[float, list[float]] = {lv: [] for lv in self.levels}

    def observe(self, state: SimState) -> None:
        mask = self.plan.safe_mask(state.t) if self.plan.kind == "rectangle" else None
        self.times.append(state.t)
        for lv in self.levels:
            self.positions[lv].append(front_position(state.u, self.plan, lv, mask))

    def trace(self, level: float | None = None, transient_cut: float = TRANSIENT_CUT,
              model: str = "linear") -> "FrontTrace":
        lv = self.levels[0] if level is None else level
        return fit_trace(self.plan.direction, self.times, self.positions[lv], lv,
                         transient_cut, model)


@dataclass
class FrontTrace:
    direction: Direction
    times: np.ndarray
    positions: np.ndarray
    level: float
    speed: float
    intercept: float
    rms: float
    transient_cut: float
    model: str = "linear"
    log_coefficient: float = 0.0
    uncertainty: float = 0.0
    window: tuple[float, float] = (0.0, 0.0)
    meta: dict = field(default_factory=dict)

    def rows(self):
        return [(float(t), float(m), self.level) for t, m in zip(self.times, self.positions)]


def fit_trace(direction: Direction, times, positions, level: float = DEFAULT_LEVEL,
              transient_cut: float = TRANSIENT_CUT, model: str = "linear") -> FrontTrace:
    """Least-squares fit of m(t) over t >= transient_cut * T.

    model "linear": m = c t + a.  model "log": m = c t + b ln t + a, which
    absorbs the logarithmic lag of pulled (KPP-type) fronts.
    """
    if model not in ("linear", "log"):
        raise ConfigError(f"unknown fit model {model!r}")
    t = np.asarray(times, dtype=float)
    m = np.asarray(positions, dtype=float)
    T = float(t.max()) if t.size else 0.0
    sel = (t >= transient_cut * T) & np.isfinite(m) & (t > 0)
    if sel.sum() < 3:
        last = m[np.isfinite(m)][-1] if np.any(np.isfinite(m)) else math.nan
        raise FrontNotFoundError(
            f"no level crossing in the post-transient window (level {level}, "
            f"{int(sel.sum())} usable samples, last position {last})")
    tw, mw = t[sel], m[sel]
    cols = [tw, np.ones_like(tw)]
    if model == "log":
        cols.insert(1, np.log(tw))
    X = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(X, mw, rcond=None)
    resid = mw - X @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    width = float(tw[-1] - tw[0])
    unc = rms / width if width > 0 else math.inf
    return FrontTrace(direction, t, m, level, float(coef[0]), float(coef[-1]), rms, transient_cut,
                      model, float(coef[1]) if model == "log" else 0.0, unc,
                      (float(tw[0]), float(tw[-1])))


def track_front(states, direction: Direction, level: float = DEFAULT_LEVEL,
                transient_cut: float = TRANSIENT_CUT, plan: GridPlan | None = None,
                model: str = "linear") -> FrontTrace:
    """Fit a front trace from a sequence of states sharing one grid."""
    if not 0.0 < level < 1.0:
        raise ConfigError("level must lie in (0, 1)")
    states = list(states)
    if not states:
        raise FrontNotFoundError("no level crossing: empty state sequence")
    plan = plan or _plan_for(states[0].grid, direction)
    times = [s.t for s in states]
    pos = [front_position(s.u, plan, level,
                          plan.safe_mask(s.t) if plan.kind == "rectangle" else None)
           for s in states]
    try:
        return fit_trace(direction, times, pos, level, transient_cut, model)
    except FrontNotFoundError as exc:
        u = states[-1].u
        raise FrontNotFoundError(
            f"{exc}; last state t = {states[-1].t:.4g}, min u = {u.min():.4g}, "
            f"max u = {u.max():.4g}") from None


def default_fit_model(nl: Nonlinearity) -> str:
    return "log" if nl.is_monostable else "linear"


def default_spacing(cell: PeriodicCell, target: float | None = None) -> float:
    """Largest spacing <= target that puts an integer number (>= 16) of nodes per cell."""
    L = min(cell.lengths)
    target = target or (0.05 if cell.dim == 1 else 0.125)
    k = max(16, math.ceil(L / target - 1e-9))
    h = L / k
    for other in cell.lengths:
        if abs(other / h - round(other / h)) > 1e-9:
            raise ConfigError(f"cell lengths {cell.lengths} admit no common spacing near {target}")
    return h


@dataclass
class SpeedMeasurement:
    speed: float
    uncertainty: float
    trace: FrontTrace
    plan: GridPlan
    inconclusive: bool = False
    states: list | None = None


def measure_speed(medium: PeriodicMedium, nl: Nonlinearity, direction: Direction,
                  t_end: float = 40.0, h: float | None = None, level: float = DEFAULT_LEVEL,
                  transient_cut: float = TRANSIENT_CUT, model: str | None = None,
                  init: InitialData | None = None, plan: GridPlan | None = None,
                  levels=None, keep_states: bool = False, cadence: float = 0.5) -> SpeedMeasurement:
    """Simulate from planar data along n and fit the front speed.

    Defaults: C = 0, K = 5, plateau 0.9 (monostable) or (1 + theta)/2
    (ignition); log-corrected fit for monostable kinds, linear otherwise.
    """
    if not (nl.is_monostable or nl.is_ignition):
        raise ConfigError(f"cannot measure a speed for nonlinearity kind {nl.kind!r}")
    init = init or planar_defaults(nl, direction)
    model = model or default_fit_model(nl)
    if plan is None:
        h = h or default_spacing(medium.cell)
        c_bound = speed_bound(medium, nl)
        back = init.K + 15.0
        ahead = 1.15 * c_bound * t_end + 15.0
        plan = plan_grid(medium, direction, h, back, ahead, c_bound, t_end)
    levels = tuple(levels) if levels else (level,)
    if level not in levels:
        levels = (level,) + levels
    obs = FrontObserver(plan, levels)
    observers = [obs]
    rec = None
    if keep_states:
        rec = Recorder()
        observers.append(rec)
    run(medium, nl, init, plan.grid, t_end, observers, cadence=cadence)
    trace = obs.trace(level, transient_cut, model)
    trace.meta["plan"] = plan.to_dict()
    trace.meta["levels"] = {lv: fit_trace(direction, obs.times, obs.positions[lv], lv,
                                          transient_cut, model).speed for lv in levels}
    inconclusive = False
    if plan.kind == "rectangle":
        last = obs.positions[level][-1]
        inconclusive = not math.isfinite(last)
    return SpeedMeasurement(trace.speed, trace.uncertainty, trace, plan, inconclusive,
                            rec.states if rec else None)


# ---------------------------------------------------------------------------
# profiles

@dataclass
class WaveProfile:
    direction: Direction
    speed: float
    z: np.ndarray
    x_bins: np.ndarray
    U: np.ndarray
    shift: float
    pulsating_residual: float
    lower: float = 0.0
    bin_width: float = 0.0

    def mean_profile(self) -> np.ndarray:
        """Average over x bins; NaN where a z bin received no samples."""
        filled = np.isfinite(self.U)
        count = filled.sum(axis=1)
        total = np.where(filled, self.U, 0.0).sum(axis=1)
        return np.where(count > 0, total / np.maximum(count, 1), np.nan)

    def monotonicity_violation(self) -> float:
        """Largest increase of U in z between consecutive filled bins, per x bin."""
        worst = 0.0
        for j in range(self.U.shape[1]):
            col = self.U[:, j]
            col = col[np.isfinite(col)]
            if col.size > 1:
                worst = max(worst, float(np.max(np.diff(col))))
        return worst

    def rows(self):
        out = []
        for i, z in enumerate(self.z):
            for j, xb in enumerate(self.x_bins):
                if np.isfinite(self.U[i, j]):
                    out.append((float(z), int(xb), float(self.U[i, j])))
        return out


def _axis_aligned(direction: Direction) -> int:
    n = direction.vector
    a = int(np.argmax(np.abs(n)))
    if abs(abs(n[a]) - 1.0) > 1e-12:
        raise ConfigError("profile extraction needs an axis-aligned direction")
    return a


def pulsating_residual(states, direction: Direction, c: float, cell: PeriodicCell,
                       t_start: float = 0.0, margin: int = 0) -> float:
    """max |u(t + L/c, x + L n) - u(t, x)| over records with t >= t_start.

    u(t + L/c, .) is obtained by cubic interpolation in time through the
    records; the spatial shift is an exact node shift along the axis of n.
    """
    a = _axis_aligned(direction)
    states = list(states)
    grid = states[0].grid
    L = cell.lengths[a]
    k = int(round(L / grid.spacing[a]))
    if abs(L / grid.spacing[a] - k) > 1e-9:
        raise ConfigError("grid spacing does not divide the cell length")
    sign = 1 if direction.vector[a] > 0 else -1
    tau = L / c
    times = np.array([s.t for s in states])
    U = np.stack([s.u for s in states])
    spline = CubicSpline(times, U, axis=0)
    worst = 0.0
    n = grid.nodes[a]
    for s in states:
        if s.t < t_start or s.t + tau > times[-1]:
            continue
        later = np.moveaxis(spline(s.t + tau), a, 0)
        now = np.moveaxis(s.u, a, 0)
        if sign > 0:
            diff = later[k + margin:n - margin] - now[margin:n - k - margin]
        else:
            diff = later[margin:n - k - margin] - now[k + margin:n - margin]
        if diff.size:
            worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def extract_profile(states, direction: Direction, c: float, cell: PeriodicCell,
                    transient_cut: float = PROFILE_CUT, shift: float | None = None,
                    level: float = DEFAULT_LEVEL, lower: float = 0.0,
                    boundary_margin: int = 0, trace: FrontTrace | None = None) -> WaveProfile:
    """Moving-frame samples U(z, x) with z = x.n - c t - shift.

    z is binned with width h/2 and x is labelled by its node index inside the
    cell.  shift aligns the level crossing with z = 0 (mean over the window)
    unless given.  With a fitted trace the frame follows the fitted
    trajectory instead, which removes the slow logarithmic lag of pulled
    fronts from the alignment.
    """
    if not c > 0:
        raise ConfigError("profile extraction needs a positive speed")
    a = _axis_aligned(direction)
    states = sorted(states, key=lambda s: s.t)
    grid = states[0].grid
    T = states[-1].t
    window = [s for s in states if s.t >= transient_cut * T]
    L = cell.lengths[a]
    if len(window) < 2 or (window[-1].t - window[0].t) * c < 3 * L:
        raise FrontNotFoundError(
            "profile window covers fewer than 3 cell crossings; run longer")
    plan = _plan_for(grid, direction)

    def frame(t):
        if trace is None:
            return c * t + shift
        return trace.speed * t + trace.log_coefficient * math.log(t) + trace.intercept

    if trace is not None:
        shift = trace.intercept
    elif shift is None:
        offs = [front_position(s.u, plan, level) - c * s.t for s in window]
        offs = [o for o in offs if math.isfinite(o)]
        if not offs:
            raise FrontNotFoundError("no level crossing in the post-transient window")
        shift = float(np.mean(offs))
    h = grid.spacing[a]
    width = h / 2
    per_cell = [int(round(Lc / hc)) for Lc, hc in zip(cell.lengths, grid.spacing)]
    idx = np.indices(grid.nodes)
    xbin = np.zeros(grid.nodes, dtype=np.int64)
    for ax in range(grid.dim):
        origin_idx = int(round(grid.origin[ax] / grid.spacing[ax]))
        xbin = xbin * per_cell[ax] + (idx[ax] + origin_idx) % per_cell[ax]
    s_nodes = plan.s
    keep = np.ones(grid.nodes, dtype=bool)
    if boundary_margin:
        sl = [slice(None)] * grid.dim
        sl[a] = slice(boundary_margin, grid.nodes[a] - boundary_margin)
        keep[:] = False
        keep[tuple(sl)] = True
    zs, xs, us = [], [], []
    for st in window:
        z = s_nodes - frame(st.t)
        zs.append(z[keep])
        xs.append(xbin[keep])
        us.append(st.u[keep])
    z = np.concatenate(zs)
    xb = np.concatenate(xs)
    u = np.concatenate(us)
    zi = np.floor(z / width).astype(np.int64)
    z0 = zi.min()
    nz = int(zi.max() - z0 + 1)
    labels = np.unique(xb)
    col = np.searchsorted(labels, xb)
    sums = np.zeros((nz, labels.size))
    counts = np.zeros((nz, labels.size))
    np.add.at(sums, (zi - z0, col), u)
    np.add.at(counts, (zi - z0, col), 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        Ub = np.where(counts > 0, sums / counts, np.nan)
    zc = (np.arange(nz) + z0 + 0.5) * width
    r = pulsating_residual(window, direction, c, cell, margin=boundary_margin)
    return WaveProfile(direction, c, zc, labels, Ub, shift, r, lower, width)


def decay_rate(profile: WaveProfile, upper: float = 0.1, floor: float = 1e-12,
               z_max: float | None = None) -> float:
    """Exponential decay rate of the leading tail.

    Fits log(U - lower) = -lam z + b(x) on samples with U - lower in
    (floor, upper), one intercept per cell position.
    """
    V = profile.U - profile.lower
    zz = np.broadcast_to(profile.z[:, None], V.shape)
    jj = np.broadcast_to(np.arange(V.shape[1])[None, :], V.shape)
    lead = zz > 0
    sel = np.isfinite(V) & (V > floor) & (V < upper) & lead
    if z_max is not None:
        sel &= zz <= z_max
    if sel.sum() < 4:
        raise FrontNotFoundError(f"only {int(sel.sum())} usable tail samples (need 4)")
    z = zz[sel]
    y = np.log(V[sel])
    j = jj[sel]
    used = np.unique(j)
    X = np.zeros((z.size, 1 + used.size))
    X[:, 0] = -z
    X[np.arange(z.size), 1 + np.searchsorted(used, j)] = 1.0
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(coef[0])
