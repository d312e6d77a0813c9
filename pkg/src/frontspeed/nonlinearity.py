"""Reaction terms f(x, u) = r(x) g(u).

All built-in families are separable: a positive periodic rate field r(x)
times a shape g(u).  The shape is clamped to 0 below the lower cutoff and
above 1 + rho so the simulator stays total; inside [lower, upper] it is
the exact closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .core import PeriodicCell, ScalarField, sample_field
from .errors import ConfigError

MONOSTABLE_KINDS = ("kpp_monostable", "general_monostable")
IGNITION_KINDS = ("ignition", "ignition_approx")


def _kpp_shape(u, rho=0.5):
    u = np.asarray(u, dtype=float)
    g = u * (1.0 - u)
    return np.where((u < 0.0) | (u > 1.0 + rho), 0.0, g)


def _monostable_shape(u, b=0.0, rho=0.5):
    u = np.asarray(u, dtype=float)
    g = u * (1.0 - u) * (1.0 + b * u)
    return np.where((u < 0.0) | (u > 1.0 + rho), 0.0, g)


def _ignition_shape(u, theta=0.5, rho=0.25):
    u = np.asarray(u, dtype=float)
    g = (u - theta) * (1.0 - u)
    return np.where((u <= theta) | (u > 1.0 + rho), 0.0, g)


def _approx_shape(u, base=None, eps=0.1):
    u = np.asarray(u, dtype=float)
    top = 1.0 - eps
    # splice: f(1 - eps + 2 (u - (1 - eps))), written as 1 - 2 (1 - eps/2 - u) so
    # that the top state 1 - eps/2 maps to exactly 1
    arg = np.where(u > top, 1.0 - 2.0 * ((1.0 - eps / 2.0) - u), u)
    return np.where(u <= 0.0, 0.0, base(arg))


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    kind: str
    rate: ScalarField
    shape: Callable[[np.ndarray], np.ndarray]
    theta: float = 0.0
    lower: float = 0.0
    upper: float = 1.0
    rho: float = 0.5
    growth_at_zero: float = 1.0
    params: dict = field(default_factory=dict)
    eps: float | None = None
    base: "Nonlinearity | None" = None
    lipschitz_M: float = float("nan")

    def __post_init__(self):
        if math.isnan(self.lipschitz_M):
            object.__setattr__(self, "lipschitz_M", lipschitz_ratio(self))

    @property
    def cell(self) -> PeriodicCell:
        return self.rate.cell

    @property
    def is_monostable(self) -> bool:
        return self.kind in MONOSTABLE_KINDS

    @property
    def is_ignition(self) -> bool:
        return self.kind in IGNITION_KINDS

    def f(self, u, r):
        """Reaction from values u and rate values r at the same nodes."""
        return r * self.shape(u)

    def __call__(self, x, u):
        return self.rate.values_at(x) * self.shape(u)

    def linearization_at_zero(self) -> ScalarField:
        """d_u f(x, 0) as a periodic field (zero for ignition kinds)."""
        return self.rate.scaled(self.growth_at_zero if self.is_monostable else 0.0)

    def descriptor(self) -> dict:
        d = {"kind": self.kind, "rate": self.rate.descriptor()}
        d.update(self.params)
        if self.base is not None:
            d["base"] = self.base.descriptor()
        return d


def _rate_field(rate, cell: PeriodicCell | None, resolution=64) -> ScalarField:
    if isinstance(rate, ScalarField):
        return rate
    if cell is None:
        cell = PeriodicCell((1.0,))
    if isinstance(rate, dict):
        return sample_field(rate, cell, resolution, "scalar")
    return sample_field({"kind": "constant", "value": float(rate)}, cell, resolution, "scalar")


def make_kpp(r=1.0, cell: PeriodicCell | None = None) -> Nonlinearity:
    """f(x, u) = r(x) u (1 - u)."""
    rate = _rate_field(r, cell)
    if not rate.vmin > 0:
        raise ConfigError(f"KPP rate must be positive on the cell, min r = {rate.vmin}")
    return Nonlinearity("kpp_monostable", rate, partial(_kpp_shape, rho=0.5),
                        theta=0.0, rho=0.5, growth_at_zero=1.0)


def monostable_rho(b: float) -> float:
    """1 - u* where u* is where g(u) = u(1-u)(1+bu) peaks."""
    # g'(u) = 1 + 2 (b - 1) u - 3 b u^2; rationalized root, stable as b -> 0
    ustar = 1.0 / (math.sqrt((b - 1.0) ** 2 + 3.0 * b) - (b - 1.0))
    return 1.0 - ustar


def make_monostable(b: float, r=1.0, cell: PeriodicCell | None = None) -> Nonlinearity:
    """f = r(x) u (1 - u)(1 + b u); KPP only when b <= 1."""
    if b < 0:
        raise ConfigError("monostable parameter b must be nonnegative")
    rate = _rate_field(r, cell)
    if not rate.vmin > 0:
        raise ConfigError(f"rate must be positive on the cell, min r = {rate.vmin}")
    rho = monostable_rho(b)
    return Nonlinearity("general_monostable", rate, partial(_monostable_shape, b=b, rho=rho),
                        theta=0.0, rho=rho, growth_at_zero=1.0, params={"b": b})


def make_ignition(theta: float, r=1.0, cell: PeriodicCell | None = None) -> Nonlinearity:
    """f = r(x) (u - theta)(1 - u) for u > theta, zero below."""
    if not 0.0 < theta < 1.0:
        raise ConfigError(f"ignition threshold must lie in (0, 1), got {theta}")
    rate = _rate_field(r, cell)
    if not rate.vmin > 0:
        raise ConfigError(f"rate must be positive on the cell, min r = {rate.vmin}")
    rho = (1.0 - theta) / 2.0
    return Nonlinearity("ignition", rate, partial(_ignition_shape, theta=theta, rho=rho),
                        theta=theta, rho=rho, growth_at_zero=0.0, params={"theta": theta})


def make_ignition_approx(base: Nonlinearity, eps: float) -> Nonlinearity:
    """Ignition approximation from below of a monostable reaction.

    Zero on [-eps, 0], equal to the base on [0, 1 - eps], and the base
    evaluated at 1 - eps + 2 (u - (1 - eps)) on [1 - eps, 1 - eps/2].
    The steady states become -eps, 0 (threshold) and 1 - eps/2.
    """
    if not base.is_monostable:
        raise ConfigError("ignition approximation needs a monostable base")
    if not 0.0 < eps < min(base.rho, 0.5):
        raise ConfigError(
            f"eps = {eps} must lie in (0, min(rho, 1/2)) = (0, {min(base.rho, 0.5)})")
    shape = partial(_approx_shape, base=base.shape, eps=eps)
    return Nonlinearity("ignition_approx", base.rate, shape, theta=0.0, lower=-eps,
                        upper=1.0 - eps / 2.0, rho=base.rho - eps / 2.0, growth_at_zero=0.0,
                        params={"eps": eps}, eps=eps, base=base)


def nonlinearity_from_descriptor(d: dict, cell: PeriodicCell) -> Nonlinearity:
    kind = d.get("kind")
    rate = d.get("rate", 1.0)
    if kind in ("kpp", "kpp_monostable"):
        return make_kpp(rate, cell)
    if kind in ("monostable", "general_monostable"):
        return make_monostable(float(d.get("b", 0.0)), rate, cell)
    if kind == "ignition":
        return make_ignition(float(d["theta"]), rate, cell)
    if kind == "ignition_approx":
        return make_ignition_approx(nonlinearity_from_descriptor(d["base"], cell), float(d["eps"]))
    raise ConfigError(f"unknown nonlinearity kind {kind!r}")


def lipschitz_ratio(nl: Nonlinearity, nu: int = 1001) -> float:
    """Sampled sup of f(x, u) / |u - theta| over u in (theta, upper]."""
    u = nl.theta + (nl.upper - nl.theta) * np.arange(1, nu) / (nu - 1)
    ratio = nl.shape(u) / np.abs(u - nl.theta)
    r = nl.rate.samples.ravel()
    return float(max(np.max(r) * np.max(ratio), np.min(r) * np.max(ratio), 0.0))


# ---------------------------------------------------------------------------
# assumption checks

@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    violation: float


@dataclass
class AssumptionReport:
    kind: str
    checks: list[AssumptionCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "passed": self.passed,
                "checks": [vars(c) for c in self.checks]}


def _x_samples(cell: PeriodicCell, nx: int) -> np.ndarray:
    per_axis = nx if cell.dim == 1 else max(2, int(round(math.sqrt(nx))))
    return cell.cell_grid(per_axis).coordinates().reshape(-1, cell.dim)


def check_assumptions(nl: Nonlinearity, nx: int = 64, nu: int = 1001) -> AssumptionReport:
    """Sampled versions of the steady-state, sign, cutoff and near-1 conditions."""
    x = _x_samples(nl.cell, nx)
    r = nl.rate.values_at(x)[:, None]

    def F(u):
        return r * nl.shape(np.asarray(u, dtype=float))[None, :]

    checks = []
    ends = np.abs(F([nl.lower, nl.upper]))
    v = float(ends.max())
    checks.append(AssumptionCheck("steady_states", v <= 1e-12, v))

    if nl.is_monostable:
        vals = F(np.linspace(0.0, 1.0, nu))
        v = float(max(0.0, -vals.min()))
        checks.append(AssumptionCheck("nonnegative", v == 0.0, v))
    else:
        vals = F(np.linspace(nl.lower, nl.theta, nu))
        v = float(np.abs(vals).max())
        checks.append(AssumptionCheck("cutoff", v == 0.0, v))

    inner = np.linspace(nl.theta, nl.upper, nu)[1:-1]
    best = F(inner).max(axis=0)
    v = float(max(0.0, -best.min()))
    checks.append(AssumptionCheck("positive_somewhere", bool(np.all(best > 0)), v))

    du = 1e-3
    u = np.arange(nl.upper, nl.upper - nl.rho, -du)[::-1]
    u = u[u > nl.upper - nl.rho]
    vals = F(u)
    inc = np.diff(vals, axis=1) if u.size > 1 else np.zeros((1, 1))
    v = float(max(0.0, inc.max()))
    checks.append(AssumptionCheck("near_one_monotone", v <= 1e-14, v))
    return AssumptionReport(nl.kind, checks)
