"""Direction scans, continuity checks and ignition-approximation convergence."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import TWO_PI, Direction, PeriodicMedium, directions_on_circle
from .eigen import linear_speed
from .errors import ConfigError, FrontspeedError
from .fronts import measure_speed
from .nonlinearity import Nonlinearity, make_ignition_approx

METHODS = ("eigen_lin", "sim_direct", "sim_ignition_approx")


def parallel_map(fn, items, threads: int = 1) -> list:
    """Ordered map; results are gathered by index so scheduling cannot leak into output."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class SpeedEntry:
    direction: Direction
    c: float
    method: str
    uncertainty: float = 0.0
    flags: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def angle(self) -> float:
        return self.direction.angle

    @property
    def ok(self) -> bool:
        return math.isfinite(self.c) and not any(f.startswith("error") for f in self.flags)


@dataclass
class SpeedCurve:
    entries: list[SpeedEntry]
    method: str
    medium_hash: str = ""
    nonlinearity: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.entries.sort(key=lambda e: e.angle)
        angles = [round(e.angle, 12) for e in self.entries]
        if len(set(angles)) != len(angles):
            raise ConfigError("speed curve has duplicate angles")

    @property
    def angles(self) -> np.ndarray:
        return np.array([e.angle for e in self.entries])

    @property
    def speeds(self) -> np.ndarray:
        return np.array([e.c for e in self.entries])

    @property
    def kappa(self) -> float:
        ok = [e.c for e in self.entries if e.ok]
        return min(ok) if ok else math.nan

    @property
    def K_sup(self) -> float:
        ok = [e.c for e in self.entries if e.ok]
        return max(ok) if ok else math.nan

    @property
    def max_uncertainty(self) -> float:
        return max((e.uncertainty for e in self.entries if e.ok), default=0.0)

    @property
    def failures(self) -> list[SpeedEntry]:
        return [e for e in self.entries if not e.ok]

    def max_jump(self) -> float:
        """Largest |c_i - c_(i+1)| between neighbors on the circle (wrapping around)."""
        c = self.speeds
        if c.size < 2:
            return 0.0
        return float(np.max(np.abs(c - np.roll(c, -1))))

    def at(self, angle: float) -> SpeedEntry:
        for e in self.entries:
            d = abs((e.angle - angle + math.pi) % TWO_PI - math.pi)
            if d < 1e-9:
                return e
        raise KeyError(angle)

    def rows(self):
        return [(e.angle, e.c, e.method, e.uncertainty, ";".join(e.flags)) for e in self.entries]


def _approx_method(eps: float) -> str:
    return f"sim_ignition_approx({eps:g})"


def speed_at(medium: PeriodicMedium, nl: Nonlinearity, direction: Direction, method: str,
             eps: float | None = None, sim: dict | None = None, eig: dict | None = None) -> SpeedEntry:
    """One speed evaluation; numerical and configuration failures become flags."""
    sim = dict(sim or {})
    eig = dict(eig or {})
    label = _approx_method(eps) if method == "sim_ignition_approx" else method
    try:
        if method == "eigen_lin":
            r = linear_speed(medium, nl, direction, **eig)
            return SpeedEntry(direction, r.c_lin, label, 1e-7 * abs(r.c_lin),
                              extra={"lambda_min": r.lam_min, "residual": r.mu0_residual})
        if method == "sim_direct":
            m = measure_speed(medium, nl, direction, **sim)
        elif method == "sim_ignition_approx":
            if eps is None:
                raise ConfigError("sim_ignition_approx needs eps")
            m = measure_speed(medium, make_ignition_approx(nl, eps), direction, **sim)
        else:
            raise ConfigError(f"unknown speed method {method!r}")
        flags = ["inconclusive"] if m.inconclusive else []
        return SpeedEntry(direction, m.speed, label, m.uncertainty, flags,
                          extra={"plan": m.plan.kind, "log_coefficient": m.trace.log_coefficient})
    except FrontspeedError as exc:
        return SpeedEntry(direction, math.nan, label, math.nan,
                          [f"error: {type(exc).__name__}: {exc}"])


def scan_directions(medium: PeriodicMedium, nl: Nonlinearity, method: str = "eigen_lin",
                    n_samples: int = 8, eps: float | None = None, sim: dict | None = None,
                    eig: dict | None = None, threads: int = 1) -> SpeedCurve:
    """Speeds at the angles 2 pi k / n_samples (both orientations in 1D)."""
    if method not in METHODS:
        raise ConfigError(f"unknown speed method {method!r}; choose from {METHODS}")
    if medium.dim == 2 and (n_samples < 4 or n_samples & (n_samples - 1)):
        raise ConfigError(f"n_samples must be a power of two >= 4, got {n_samples}")
    dirs = directions_on_circle(n_samples, medium.dim)
    entries = parallel_map(lambda d: speed_at(medium, nl, d, method, eps, sim, eig), dirs, threads)
    label = _approx_method(eps) if method == "sim_ignition_approx" else method
    return SpeedCurve(entries, label, medium.hash(), nl.descriptor(),
                      {"n_samples": n_samples, "eps": eps, "sim": sim or {}, "eig": eig or {}})


@dataclass
class ContinuityReport:
    jump_coarse: float
    jump_fine: float
    max_uncertainty: float
    passed: bool
    nested: bool

    def to_dict(self) -> dict:
        return dict(vars(self))


def continuity_report(coarse: SpeedCurve, fine: SpeedCurve) -> ContinuityReport:
    """Modulus-of-continuity contraction: the fine jump must shrink to <= 0.75 of the coarse one."""
    if len(fine.entries) != 2 * len(coarse.entries):
        raise ConfigError("the fine scan must have twice the samples of the coarse scan")
    fine_angles = fine.angles
    nested = all(np.min(np.abs(fine_angles - a)) < 1e-9 for a in coarse.angles)
    jc, jf = coarse.max_jump(), fine.max_jump()
    unc = max(coarse.max_uncertainty, fine.max_uncertainty)
    ok = (not coarse.failures and not fine.failures and math.isfinite(jf)
          and jf <= 0.75 * jc + 2 * unc)
    return ContinuityReport(jc, jf, unc, bool(ok and nested), nested)


# ---------------------------------------------------------------------------
# ignition approximation

@dataclass
class ApproxCell:
    direction: Direction
    eps: float
    c: float
    uncertainty: float
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return math.isfinite(self.c)


@dataclass
class ApproxTable:
    directions: list[Direction]
    eps_list: list[float]
    cells: list[list[ApproxCell]]          # [direction][eps]
    reference: list[SpeedEntry]
    reference_method: str
    monotonicity_violations: list[tuple[int, float, float, float]]
    above_reference: list[tuple[int, float, float]]
    sup_gap: list[float]
    relative_sup_gap: list[float]
    gap_decreasing: bool

    def rows(self):
        out = []
        for i, d in enumerate(self.directions):
            for cell in self.cells[i]:
                out.append((d.angle, cell.eps, cell.c, cell.uncertainty, self.reference[i].c,
                            ";".join(cell.flags)))
        return out

    def summary_rows(self):
        viol = {e: 0 for e in self.eps_list}
        for _, _, e_small, _ in self.monotonicity_violations:
            viol[e_small] += 1
        return [(e, g, rg, viol[e]) for e, g, rg in zip(self.eps_list, self.sup_gap,
                                                       self.relative_sup_gap)]


def ignition_approx_study(medium: PeriodicMedium, base: Nonlinearity, directions, eps_list,
                          sim: dict | None = None, eig: dict | None = None,
                          reference: list[float] | None = None, threads: int = 1) -> ApproxTable:
    """Speeds of f_eps along each direction for decreasing eps, compared with c*(n).

    The reference is the linearized speed for KPP bases and a direct
    simulation otherwise, unless explicit reference values are given.
    Violations use the tolerance 2 * (u_1 + u_2) of the fit uncertainties.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError(f"eps_list must be strictly decreasing, got {eps_list}")
    directions = list(directions)
    if reference is not None:
        ref = [SpeedEntry(d, float(c), "given") for d, c in zip(directions, reference)]
        ref_method = "given"
    else:
        ref_method = "eigen_lin" if base.kind == "kpp_monostable" else "sim_direct"
        ref = parallel_map(lambda d: speed_at(medium, base, d, ref_method, sim=sim, eig=eig),
                           directions, threads)

    jobs = [(i, e) for i in range(len(directions)) for e in eps_list]

    def work(job):
        i, e = job
        ent = speed_at(medium, base, directions[i], "sim_ignition_approx", e, sim, eig)
        return ApproxCell(directions[i], e, ent.c, ent.uncertainty, ent.flags)

    flat = parallel_map(work, jobs, threads)
    cells = [flat[i * len(eps_list):(i + 1) * len(eps_list)] for i in range(len(directions))]

    mono, above = [], []
    for i, row in enumerate(cells):
        for big, small in zip(row, row[1:]):
            if big.ok and small.ok:
                tol = 2 * (big.uncertainty + small.uncertainty)
                if small.c < big.c - tol:
                    mono.append((i, small.eps, big.c, small.c))
        for cell in row:
            r = ref[i]
            if cell.ok and math.isfinite(r.c):
                if cell.c > r.c + 2 * (cell.uncertainty + r.uncertainty):
                    above.append((i, cell.eps, cell.c))
    gaps, rgaps = [], []
    for k, e in enumerate(eps_list):
        g = [ref[i].c - cells[i][k].c for i in range(len(directions))]
        rg = [(ref[i].c - cells[i][k].c) / ref[i].c for i in range(len(directions))]
        gaps.append(max(g) if all(math.isfinite(v) for v in g) else math.nan)
        rgaps.append(max(rg) if all(math.isfinite(v) for v in rg) else math.nan)
    decreasing = all(math.isfinite(a) and math.isfinite(b) and b < a for a, b in zip(gaps, gaps[1:]))
    return ApproxTable(directions, eps_list, cells, ref, ref_method, mono, above, gaps, rgaps,
                       decreasing)
