"""Periodic principal eigenvalue problems on the cell.

The operator acting on periodic phi is

    L phi = div(A grad phi) + lam^2 (n.An) phi - lam (div(A n phi) + n.A grad phi)
            + q.grad phi - lam (q.n + drift) phi + V phi

with div(A n phi) expanded by the product rule.  mu0 is the eigenvalue of
-L with a positive eigenfunction; exponential solutions
exp(-lam (x.n - c t)) phi(x) of the linearized problem exist for
c = -mu0 / lam.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .core import Direction, PeriodicMedium, ScalarField, directions_on_circle
from .errors import ConfigError, EigenSolverError, InstabilityPreconditionError, NumericalError
from .nonlinearity import Nonlinearity

MIN_RESOLUTION = 16
POSITIVE_MARGIN = 1e-9
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class EigenOperatorSpec:
    medium: PeriodicMedium
    direction: Direction
    lam: float = 0.0
    drift: float = 0.0
    potential: ScalarField | None = None
    resolution: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.lam >= 0:
            raise ConfigError(f"exponent lambda must be >= 0, got {self.lam}")
        if self.direction.dim != self.medium.dim:
            raise ConfigError("direction and medium dimensions differ")
        res = self.resolution or self.medium.resolution
        if isinstance(res, int):
            res = (res,) * self.medium.dim
        object.__setattr__(self, "resolution", tuple(int(r) for r in res))


@dataclass(frozen=True, eq=False)
class OperatorParts:
    """L(lam) = L0 + lam L1 + lam^2 L2 on the periodic cell grid."""
    L0: sp.csr_matrix
    L1: sp.csr_matrix
    L2: sp.csr_matrix
    resolution: tuple[int, ...]
    h_min: float
    a2: float

    def at(self, lam: float) -> sp.csr_matrix:
        if lam == 0.0:
            return self.L0
        return (self.L0 + lam * self.L1 + (lam * lam) * self.L2).tocsr()


@dataclass
class EigenResult:
    mu0: float
    phi: np.ndarray
    residual: float
    iterations: int
    operator_norm: float = float("nan")
    method: str = "inverse"


def assemble_parts(medium: PeriodicMedium, direction: Direction, drift: float = 0.0,
                   potential: ScalarField | None = None, resolution=None) -> OperatorParts:
    dim = medium.dim
    if isinstance(resolution, int):
        resolution = (resolution,) * dim
    res = tuple(resolution) if resolution else medium.resolution
    grid = medium.cell.cell_grid(res)
    h = grid.spacing
    x = grid.coordinates()
    N = int(np.prod(res))
    idx = np.arange(N).reshape(res)
    n = direction.vector

    A = medium.A.values_at(x)
    An = A @ n
    nAn = An @ n
    divAn = medium.A.divergence_at(x) @ n
    q = medium.q.values_at(x)
    qn = q @ n
    V = potential.values_at(x) if potential is not None else np.zeros(res)

    rows0, cols0, vals0 = [], [], []
    rows1, cols1, vals1 = [], [], []

    def add(rows, cols, vals, r, c, v):
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(np.broadcast_to(v, r.shape).ravel())

    for a in range(dim):
        e = np.zeros(dim)
        e[a] = 0.5 * h[a]
        Dp = medium.A.values_at(x + e)[..., a, a]
        Dm = medium.A.values_at(x - e)[..., a, a]
        ip = np.roll(idx, -1, axis=a)
        im = np.roll(idx, 1, axis=a)
        add(rows0, cols0, vals0, idx, ip, Dp / h[a] ** 2)
        add(rows0, cols0, vals0, idx, im, Dm / h[a] ** 2)
        add(rows0, cols0, vals0, idx, idx, -(Dp + Dm) / h[a] ** 2)
        # centered first-order terms: q.grad in L0, -2 lam (An).grad in L1
        add(rows0, cols0, vals0, idx, ip, q[..., a] / (2 * h[a]))
        add(rows0, cols0, vals0, idx, im, -q[..., a] / (2 * h[a]))
        add(rows1, cols1, vals1, idx, ip, -2.0 * An[..., a] / (2 * h[a]))
        add(rows1, cols1, vals1, idx, im, 2.0 * An[..., a] / (2 * h[a]))
        for b in range(dim):
            if b == a:
                continue
            # d_a (A_ab d_b phi), centered
            Aab = A[..., a, b]
            if not np.any(Aab):
                continue
            Ap = np.roll(Aab, -1, axis=a)
            Am = np.roll(Aab, 1, axis=a)
            w = 1.0 / (4 * h[a] * h[b])
            for sa, coef in ((-1, Ap), (1, Am)):
                base = np.roll(idx, sa, axis=a)
                sign = 1.0 if sa == -1 else -1.0
                add(rows0, cols0, vals0, idx, np.roll(base, -1, axis=b), sign * coef * w)
                add(rows0, cols0, vals0, idx, np.roll(base, 1, axis=b), -sign * coef * w)

    add(rows0, cols0, vals0, idx, idx, V)
    add(rows1, cols1, vals1, idx, idx, -(divAn + qn + drift))

    def build(rows, cols, vals):
        if not rows:
            return sp.csr_matrix((N, N))
        return sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(N, N)).tocsr()

    L0 = build(rows0, cols0, vals0)
    L1 = build(rows1, cols1, vals1)
    L2 = sp.diags(nAn.ravel()).tocsr()
    return OperatorParts(L0, L1, L2, res, min(h), medium.a2)


def assemble(spec: EigenOperatorSpec) -> sp.csr_matrix:
    """Sparse matrix of L on the periodic cell grid (row-major node order)."""
    parts = assemble_parts(spec.medium, spec.direction, spec.drift, spec.potential, spec.resolution)
    return parts.at(spec.lam)


def _operator_norm(L: sp.csr_matrix) -> float:
    return float(abs(L).sum(axis=1).max())


def _gershgorin_upper(L: sp.csr_matrix) -> float:
    d = L.diagonal()
    off = np.asarray(abs(L).sum(axis=1)).ravel() - np.abs(d)
    return float(np.max(d + off))


def solve_principal(L: sp.csr_matrix, h_min: float, a2: float, method: str = "inverse",
                    max_iters: int = 50_000, tol: float = 1e-12, x0=None) -> EigenResult:
    """Principal eigenpair of -L by positivity-preserving power iteration.

    method="inverse" iterates the resolvent (s I - L)^-1 with s above the
    Gershgorin bound; method="propagator" iterates I + tau L with
    tau = 0.2 h^2 / a2.  Both start from the all-ones vector unless x0 is
    given and stop on the Rayleigh quotient / residual test.
    """
    N = L.shape[0]
    x = np.ones(N) if x0 is None else np.array(x0, dtype=float).ravel()
    x = x / np.max(np.abs(x))
    norm = _operator_norm(L)
    scale = max(norm, 1.0)

    def rayleigh(v):
        Lv = L @ v
        mu = float(v @ Lv) / float(v @ v)
        return mu, float(np.max(np.abs(Lv - mu * v)) / np.max(np.abs(v)))

    mu, res = rayleigh(x)
    iterations = 0
    if res > tol * scale:
        if method == "inverse":
            s = _gershgorin_upper(L) + 1.0
            lu = splu((s * sp.identity(N, format="csc") - L).tocsc())
            step = lu.solve
        elif method == "propagator":
            tau = 0.2 * h_min * h_min / a2
            step = lambda v: v + tau * (L @ v)  # noqa: E731
        else:
            raise ConfigError(f"unknown eigen method {method!r}")
        check_every = 1 if method == "inverse" else 50
        mu_prev = mu
        while True:
            y = step(x)
            # keep the Perron sign
            if y.sum() < 0:
                y = -y
            x = y / np.max(np.abs(y))
            iterations += 1
            if iterations % check_every == 0:
                mu, res = rayleigh(x)
                stalled = abs(mu - mu_prev) <= 1e-15 * max(1.0, abs(mu)) and res <= 1e-8 * scale
                if res <= tol * scale or stalled:
                    break
                mu_prev = mu
            if iterations >= max_iters:
                raise EigenSolverError(
                    f"eigensolver did not converge in {max_iters} iterations "
                    f"(last residual {res:.3e})", residual=res, iterations=iterations)
    phi = x / np.max(x)
    mu, res = rayleigh(phi)
    if not np.all(phi > 0):
        raise EigenSolverError(
            f"iteration converged to a non-positive vector (min {phi.min():.3e}); "
            "the discrete operator is not Perron-positive at this resolution",
            residual=res, iterations=iterations)
    if res > 1e-8 * scale:
        raise EigenSolverError(f"eigen residual {res:.3e} exceeds 1e-8 * ||L||",
                               residual=res, iterations=iterations)
    return EigenResult(mu0=-mu, phi=phi, residual=res, iterations=iterations,
                       operator_norm=norm, method=method)


def _check_resolution(res):
    if min(res) < MIN_RESOLUTION:
        raise EigenSolverError(
            f"cell resolution {tuple(res)} is below {MIN_RESOLUTION} nodes per axis; "
            "the eigensolver refuses to iterate on an under-resolved cell")


def principal_eigenpair(spec: EigenOperatorSpec, method: str = "inverse",
                        max_iters: int = 50_000, x0=None) -> EigenResult:
    _check_resolution(spec.resolution)
    parts = assemble_parts(spec.medium, spec.direction, spec.drift, spec.potential, spec.resolution)
    r = solve_principal(parts.at(spec.lam), parts.h_min, parts.a2, method, max_iters, x0=x0)
    r.phi = r.phi.reshape(spec.resolution)
    return r


class EigenCurve:
    """mu0(n, lam) for fixed medium, direction, drift and potential.

    Assembles once and warm-starts each solve from the previous eigenvector.
    """

    def __init__(self, medium, direction, drift=0.0, potential=None, resolution=None,
                 method="inverse"):
        if isinstance(resolution, int):
            res = (resolution,) * medium.dim
        else:
            res = tuple(resolution) if resolution else medium.resolution
        _check_resolution(res)
        self.direction = direction
        self.parts = assemble_parts(medium, direction, drift, potential, res)
        self.method = method
        self._x = None
        self.history: list[tuple[float, float, float, int]] = []

    def solve(self, lam: float) -> EigenResult:
        r = solve_principal(self.parts.at(lam), self.parts.h_min, self.parts.a2,
                            self.method, x0=self._x)
        self._x = r.phi
        self.history.append((lam, r.mu0, r.residual, r.iterations))
        return r

    def mu0(self, lam: float) -> float:
        return self.solve(lam).mu0


def golden_section(g, lo: float, hi: float, tol: float = 1e-7):
    """Minimize a unimodal g on [lo, hi]; returns (argmin, min)."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol * max(1.0, abs(a) + abs(b)):
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - INV_PHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + INV_PHI * (b - a)
            gd = g(d)
    return (c, gc) if gc <= gd else (d, gd)


@dataclass
class LinearSpeed:
    c_lin: float
    lam_min: float
    mu0_residual: float
    direction: Direction
    evaluations: list = field(default_factory=list)


def linear_speed(medium: PeriodicMedium, nl: Nonlinearity, direction: Direction,
                 bracket=(1e-3, 20.0), resolution=None, tol: float = 1e-7,
                 method: str = "inverse") -> LinearSpeed:
    """c*_lin(n) = min over lam > 0 of -mu0(n, lam) / lam, by golden section."""
    if not nl.is_monostable:
        raise InstabilityPreconditionError("zero state not linearly unstable (ignition-type reaction)")
    curve = EigenCurve(medium, direction, 0.0, nl.linearization_at_zero(), resolution, method)
    mu_zero = curve.mu0(0.0)
    if not mu_zero < -1e-12:
        raise InstabilityPreconditionError(
            f"zero state not linearly unstable: mu0(n, 0) = {mu_zero:.3e} >= 0")

    cache: dict[float, float] = {}

    def g(lam):
        if lam not in cache:
            cache[lam] = -curve.mu0(lam) / lam
        return cache[lam]

    lo, hi = map(float, bracket)
    while True:
        lam, val = golden_section(g, lo, hi, tol)
        width = tol * max(1.0, hi)
        if lam >= hi - 4 * width:
            if hi * 2 > 1e3:
                raise NumericalError("lambda bracket expansion exceeded 1e3")
            lo, hi = hi / 2, hi * 2
            continue
        if lam <= lo + 4 * tol * max(1.0, lo) and lo > 1e-8:
            lo = lo / 10
            continue
        break
    # flat minimum: walk left to the smallest lam within 1e-9 relative
    probe = lam * (1 - 1e-3)
    if probe > lo and g(probe) <= val * (1 + 1e-9):
        left, right = lo, lam
        for _ in range(60):
            mid = 0.5 * (left + right)
            if g(mid) <= val * (1 + 1e-9):
                right = mid
            else:
                left = mid
        lam = right
        val = g(lam)
    res = curve.solve(lam).residual
    return LinearSpeed(val, lam, res, direction, list(curve.history))


@dataclass
class Lambda0Result:
    lam0: float
    min_mu: float
    kappa: float


def find_lambda0(medium: PeriodicMedium, kappa: float, n_directions: int = 32,
                 resolution=None, k_max: int = 20) -> Lambda0Result:
    """First lam in 1, 1/2, 1/4, ... with min over directions of mu(n, lam) > 0.

    mu is the principal eigenvalue of the operator with drift shift kappa and
    no potential, whose slope at lam = 0 is kappa.
    """
    if not kappa > 0:
        raise ConfigError("kappa must be positive")
    directions = directions_on_circle(n_directions, medium.dim)
    curves = [EigenCurve(medium, n, kappa, None, resolution) for n in directions]
    for k in range(k_max + 1):
        lam = 2.0 ** (-k)
        worst = min(c.mu0(lam) for c in curves)
        # strictly positive beyond solver round-off
        if worst > POSITIVE_MARGIN * lam:
            return Lambda0Result(lam, worst, kappa)
    raise NumericalError(
        f"no lambda >= 2^-{k_max} with mu(n, lambda) > 0 for all directions; "
        f"kappa = {kappa} is not a valid lower speed bound for this medium")
