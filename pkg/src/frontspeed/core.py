"""Periodic cells, sampled coefficient fields, directions and grids.

Coefficient fields are stored as samples on a periodic cell grid and
evaluated by bilinear interpolation with periodic wrap.  Built-in families
also keep their closed form, which is used for the ellipticity bounds, for
div(A n) and when a simulation grid needs values off the cell grid.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi
_SNAP = 1e-9


@dataclass(frozen=True)
class PeriodicCell:
    lengths: tuple[float, ...]

    def __post_init__(self):
        lengths = tuple(float(v) for v in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        if len(lengths) not in (1, 2):
            raise ConfigError(f"cell dimension must be 1 or 2, got {len(lengths)}")
        if not all(math.isfinite(v) and v > 0 for v in lengths):
            raise ConfigError(f"cell lengths must be positive and finite, got {lengths}")

    @property
    def dim(self) -> int:
        return len(self.lengths)

    def cell_grid(self, resolution: Sequence[int]) -> "GridSpec":
        resolution = _as_resolution(resolution, self.dim)
        return GridSpec(origin=(0.0,) * self.dim, extents=self.lengths,
                        nodes=resolution, bc=("periodic",) * self.dim)


@dataclass(frozen=True)
class Direction:
    components: tuple[float, ...]

    def __post_init__(self):
        comps = tuple(float(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) not in (1, 2):
            raise ConfigError("direction must live in R^1 or R^2")
        if abs(math.hypot(*comps) - 1.0) > 1e-12:
            raise ConfigError(f"direction {comps} is not a unit vector")

    @classmethod
    def from_angle(cls, angle: float, dim: int = 2) -> "Direction":
        if dim == 1:
            c = math.cos(angle)
            if abs(abs(c) - 1.0) > 1e-12:
                raise ConfigError("in 1D the only directions are angle 0 and pi")
            return cls((math.copysign(1.0, c),))
        c, s = math.cos(angle), math.sin(angle)
        # exact zeros keep axis-aligned directions axis-aligned
        c = 0.0 if abs(c) < 1e-15 else c
        s = 0.0 if abs(s) < 1e-15 else s
        norm = math.hypot(c, s)
        return cls((c / norm, s / norm))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.components)

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def angle(self) -> float:
        if self.dim == 1:
            return 0.0 if self.components[0] > 0 else math.pi
        return math.atan2(self.components[1], self.components[0]) % TWO_PI


def directions_on_circle(n_samples: int, dim: int = 2) -> list[Direction]:
    """Equally spaced directions, angle 2*pi*k/n_samples for k = 0..n-1."""
    if dim == 1:
        return [Direction((1.0,)), Direction((-1.0,))]
    return [Direction.from_angle(TWO_PI * k / n_samples) for k in range(n_samples)]


@dataclass(frozen=True)
class GridSpec:
    """Structured grid.

    ``twist[b]`` is only meaningful for a periodic axis ``b`` in 2D: wrapping
    across that axis shifts the index along the other axis by ``twist[b]``
    nodes, i.e. u(x, y + P) = u(x - twist*h_x, y).  This realizes
    invariance under a lattice vector that is not axis-aligned.
    """

    origin: tuple[float, ...]
    extents: tuple[float, ...]
    nodes: tuple[int, ...]
    bc: tuple[str, ...]
    twist: tuple[int, ...] = ()

    def __post_init__(self):
        dim = len(self.nodes)
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "extents", tuple(float(v) for v in self.extents))
        object.__setattr__(self, "nodes", tuple(int(v) for v in self.nodes))
        object.__setattr__(self, "bc", tuple(self.bc))
        if not self.twist:
            object.__setattr__(self, "twist", (0,) * dim)
        if not (len(self.origin) == len(self.extents) == len(self.bc) == len(self.twist) == dim):
            raise ConfigError("grid specification has inconsistent dimensions")
        for tag in self.bc:
            if tag not in ("periodic", "noflux"):
                raise ConfigError(f"unknown boundary tag {tag!r}")
        if any(n < 2 for n in self.nodes):
            raise ConfigError("grids need at least two nodes per axis")
        for a, tw in enumerate(self.twist):
            if tw and (self.bc[a] != "periodic" or dim != 2):
                raise ConfigError("twist only applies to a periodic axis of a 2D grid")

    @property
    def dim(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(
            ext / (n - 1) if tag == "noflux" else ext / n
            for ext, n, tag in zip(self.extents, self.nodes, self.bc)
        )

    @property
    def shape(self) -> tuple[int, ...]:
        return self.nodes

    def axis_coordinates(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.nodes[axis])

    def coordinates(self) -> np.ndarray:
        """Node coordinates, shape (*nodes, dim)."""
        axes = [self.axis_coordinates(a) for a in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def to_dict(self) -> dict:
        return {"origin": list(self.origin), "extents": list(self.extents),
                "nodes": list(self.nodes), "bc": list(self.bc), "twist": list(self.twist)}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(tuple(d["origin"]), tuple(d["extents"]), tuple(d["nodes"]),
                   tuple(d["bc"]), tuple(d.get("twist", ())))

    def resolves_cell(self, cell: PeriodicCell, min_nodes: int = 16) -> bool:
        for h, L in zip(self.spacing, cell.lengths):
            ratio = L / h
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < min_nodes:
                return False
        return True


def _as_resolution(resolution, dim) -> tuple[int, ...]:
    if isinstance(resolution, (int, np.integer)):
        return (int(resolution),) * dim
    resolution = tuple(int(r) for r in resolution)
    if len(resolution) != dim:
        raise ConfigError(f"resolution {resolution} does not match dimension {dim}")
    return resolution


# ---------------------------------------------------------------------------
# closed-form coefficient families

def _period(params, cell: PeriodicCell, axis: int) -> float:
    periods = params.get("period")
    P = float(periods[axis]) if periods is not None else cell.lengths[axis]
    ratio = cell.lengths[axis] / P
    if P <= 0 or abs(ratio - round(ratio)) > 1e-9:
        raise ConfigError(f"period {P} does not divide the cell length {cell.lengths[axis]}")
    return P


def _tensor_values(expr, cell, x):
    dim = cell.dim
    kind = expr["kind"]
    shape = x.shape[:-1]
    if kind == "constant":
        M = _constant_matrix(expr, dim)
        return np.broadcast_to(M, shape + (dim, dim)).copy()
    if kind == "cosine_tensor":
        a, k, d = _cosine_tensor_params(expr, dim)
        P = _period(expr, cell, k)
        out = np.zeros(shape + (dim, dim))
        for i in range(dim):
            out[..., i, i] = d[i]
        out[..., k, k] = d[k] * (1.0 + a * np.cos(TWO_PI * x[..., k] / P))
        return out
    raise ConfigError(f"unknown tensor family {kind!r}")


def _tensor_divergence(expr, cell, x):
    """Column divergence d_j = sum_i d/dx_i A_ij, so div(A n) = d . n."""
    dim = cell.dim
    out = np.zeros(x.shape[:-1] + (dim,))
    if expr["kind"] == "cosine_tensor":
        a, k, d = _cosine_tensor_params(expr, dim)
        P = _period(expr, cell, k)
        out[..., k] = -d[k] * a * (TWO_PI / P) * np.sin(TWO_PI * x[..., k] / P)
    return out


def _constant_matrix(expr, dim):
    if "matrix" in expr:
        M = np.array(expr["matrix"], dtype=float)
    else:
        M = float(expr.get("value", 1.0)) * np.eye(dim)
    if M.shape != (dim, dim):
        raise ConfigError(f"constant tensor has shape {M.shape}, expected {(dim, dim)}")
    return M


def _cosine_tensor_params(expr, dim):
    a = float(expr.get("amplitude", 0.0))
    k = int(expr.get("axis", 0))
    d = [float(v) for v in expr.get("diag", [1.0] * dim)]
    if not 0 <= k < dim or len(d) != dim:
        raise ConfigError("cosine_tensor axis/diag do not match the cell dimension")
    return a, k, d


def _tensor_bounds(expr, dim) -> tuple[float, float]:
    if expr["kind"] == "constant":
        M = _constant_matrix(expr, dim)
        ev = np.linalg.eigvalsh(0.5 * (M + M.T))
        return float(ev[0]), float(ev[-1])
    if expr["kind"] == "cosine_tensor":
        a, k, d = _cosine_tensor_params(expr, dim)
        lo = [d[i] for i in range(dim) if i != k] + [d[k] * (1 - abs(a))]
        hi = [d[i] for i in range(dim) if i != k] + [d[k] * (1 + abs(a))]
        return min(lo), max(hi)
    raise ConfigError(f"unknown tensor family {expr['kind']!r}")


def _vector_values(expr, cell, x):
    dim = cell.dim
    kind = expr["kind"]
    shape = x.shape[:-1]
    out = np.zeros(shape + (dim,))
    if kind == "zero":
        return out
    if kind == "constant":
        v = np.array(expr["velocity"], dtype=float)
        if v.shape != (dim,):
            raise ConfigError("constant velocity has the wrong dimension")
        return np.broadcast_to(v, shape + (dim,)).copy()
    if kind == "cellular":
        if dim != 2:
            raise ConfigError("cellular flow needs a 2D cell")
        U = float(expr.get("amplitude", 1.0))
        k1 = TWO_PI / _period(expr, cell, 0)
        k2 = TWO_PI / _period(expr, cell, 1)
        # q = (-d_y psi, d_x psi) with psi = U sin(k1 x) sin(k2 y) / (2 pi)
        out[..., 0] = -U * k2 / TWO_PI * np.sin(k1 * x[..., 0]) * np.cos(k2 * x[..., 1])
        out[..., 1] = U * k1 / TWO_PI * np.cos(k1 * x[..., 0]) * np.sin(k2 * x[..., 1])
        return out
    if kind == "shear":
        if dim != 2:
            raise ConfigError("shear flow needs a 2D cell")
        U = float(expr.get("amplitude", 1.0))
        comp = int(expr.get("axis", 0))
        vary = int(expr.get("vary_axis", 1 - comp))
        if comp == vary:
            raise ConfigError("shear flow varying along its own component is not divergence-free")
        P = _period(expr, cell, vary)
        out[..., comp] = U * np.cos(TWO_PI * x[..., vary] / P)
        return out
    raise ConfigError(f"unknown flow family {kind!r}")


def _scalar_values(expr, cell, x):
    kind = expr["kind"]
    shape = x.shape[:-1]
    if kind == "constant":
        return np.full(shape, float(expr.get("value", 1.0)))
    if kind == "cosine":
        m = float(expr.get("mean", 1.0))
        a = float(expr.get("amplitude", 0.0))
        k = int(expr.get("axis", 0))
        if not 0 <= k < cell.dim:
            raise ConfigError("cosine scalar axis out of range")
        P = _period(expr, cell, k)
        return m + a * np.cos(TWO_PI * x[..., k] / P)
    raise ConfigError(f"unknown scalar family {kind!r}")


def _scalar_bounds(expr) -> tuple[float, float]:
    if expr["kind"] == "constant":
        v = float(expr.get("value", 1.0))
        return v, v
    m = float(expr.get("mean", 1.0))
    a = abs(float(expr.get("amplitude", 0.0)))
    return m - a, m + a


# ---------------------------------------------------------------------------
# fields

def evaluate_periodic(field_obj, x) -> np.ndarray:
    """Bilinear interpolation of the samples with periodic wrap.

    Grid-aligned points are snapped to their node, so evaluation at x and
    x + k*L returns bitwise-identical values there.
    """
    x = np.asarray(x, dtype=float)
    cell = field_obj.cell
    res = field_obj.resolution
    samples = field_obj.samples
    dim = cell.dim
    base, frac = [], []
    for a in range(dim):
        s = x[..., a] * (res[a] / cell.lengths[a])
        r = np.round(s)
        s = np.where(np.abs(s - r) < _SNAP, r, s)
        i = np.floor(s)
        base.append(i.astype(np.int64))
        frac.append(s - i)
    value_ndim = samples.ndim - dim
    out = None
    for corner in itertools.product((0, 1), repeat=dim):
        weight = np.ones(x.shape[:-1])
        ids = []
        for a, c in enumerate(corner):
            weight = weight * (frac[a] if c else 1.0 - frac[a])
            ids.append((base[a] + c) % res[a])
        term = weight.reshape(weight.shape + (1,) * value_ndim) * samples[tuple(ids)]
        out = term if out is None else out + term
    return out


class _Field:
    cell: PeriodicCell
    resolution: tuple[int, ...]
    samples: np.ndarray
    expr: dict

    def values_at(self, x) -> np.ndarray:
        """Closed form for built-in families, interpolation otherwise."""
        x = np.asarray(x, dtype=float)
        if self.expr.get("kind") == "grid":
            return evaluate_periodic(self, x)
        return self._closed_form(x)

    def node_coordinates(self) -> np.ndarray:
        return self.cell.cell_grid(self.resolution).coordinates()

    def descriptor(self) -> dict:
        return dict(self.expr)

    def __call__(self, x):
        return evaluate_periodic(self, x)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ScalarField(_Field):
    cell: PeriodicCell
    resolution: tuple[int, ...]
    samples: np.ndarray
    expr: dict
    vmin: float
    vmax: float

    def _closed_form(self, x):
        return _scalar_values(self.expr, self.cell, x)

    def scaled(self, factor: float) -> "ScalarField":
        if self.expr["kind"] == "constant":
            expr = {"kind": "constant", "value": float(self.expr.get("value", 1.0)) * factor}
        elif self.expr["kind"] == "cosine":
            expr = dict(self.expr, mean=float(self.expr.get("mean", 1.0)) * factor,
                        amplitude=float(self.expr.get("amplitude", 0.0)) * factor)
        else:
            expr = {"kind": "grid"}
        lo, hi = sorted((self.vmin * factor, self.vmax * factor))
        return ScalarField(self.cell, self.resolution, _freeze(self.samples * factor), expr, lo, hi)


@dataclass(frozen=True, eq=False)
class TensorField(_Field):
    cell: PeriodicCell
    resolution: tuple[int, ...]
    samples: np.ndarray
    expr: dict
    a1: float
    a2: float

    def _closed_form(self, x):
        return _tensor_values(self.expr, self.cell, x)

    def divergence_at(self, x) -> np.ndarray:
        """Column divergence sum_i d_i A_ij at points x, shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        if self.expr.get("kind") != "grid":
            return _tensor_divergence(self.expr, self.cell, x)
        return evaluate_periodic(_DerivedField(self.cell, self.resolution,
                                               _grid_column_divergence(self)), x)

    @property
    def is_diagonal(self) -> bool:
        dim = self.cell.dim
        off = [self.samples[..., i, j] for i in range(dim) for j in range(dim) if i != j]
        return all(np.all(o == 0.0) for o in off)

    @property
    def is_constant(self) -> bool:
        return self.expr.get("kind") == "constant"


@dataclass(frozen=True, eq=False)
class VectorField(_Field):
    cell: PeriodicCell
    resolution: tuple[int, ...]
    samples: np.ndarray
    expr: dict

    def _closed_form(self, x):
        return _vector_values(self.expr, self.cell, x)

    @property
    def sup_norm(self) -> float:
        if self.samples.size == 0:
            return 0.0
        return float(np.max(np.abs(self.samples)))

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.samples == 0.0))


@dataclass(frozen=True, eq=False)
class _DerivedField:
    cell: PeriodicCell
    resolution: tuple[int, ...]
    samples: np.ndarray


def _periodic_central_diff(samples: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(samples, -1, axis=axis) - np.roll(samples, 1, axis=axis)) / (2.0 * h)


def _grid_column_divergence(A: TensorField) -> np.ndarray:
    dim = A.cell.dim
    h = [L / n for L, n in zip(A.cell.lengths, A.resolution)]
    out = np.zeros(A.samples.shape[:-1])
    for j in range(dim):
        for i in range(dim):
            out[..., j] += _periodic_central_diff(A.samples[..., i, j], i, h[i])
    return out


def discrete_divergence(q: VectorField) -> np.ndarray:
    h = [L / n for L, n in zip(q.cell.lengths, q.resolution)]
    return sum(_periodic_central_diff(q.samples[..., a], a, h[a]) for a in range(q.cell.dim))


def _unit_vectors(dim: int, count: int = 16) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    ang = TWO_PI * np.arange(count) / count
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def check_tensor(A: TensorField, tol_sym: float = 1e-12, tol_bounds: float = 1e-10) -> None:
    S = A.samples
    asym = np.max(np.abs(S - np.swapaxes(S, -1, -2))) if S.size else 0.0
    if asym > tol_sym:
        raise ConfigError(f"diffusion tensor is not symmetric (max asymmetry {asym:.3g})")
    xi = _unit_vectors(A.cell.dim)
    quad = np.einsum("ka,...ab,kb->...k", xi, S, xi)
    if quad.min() < A.a1 - tol_bounds or quad.max() > A.a2 + tol_bounds:
        raise ConfigError(
            f"quadratic form leaves [a1, a2] = [{A.a1}, {A.a2}]: range [{quad.min()}, {quad.max()}]")


def check_vector(q: VectorField, tol_div: float = 1e-8, tol_mean: float = 1e-10) -> None:
    div = np.max(np.abs(discrete_divergence(q)))
    if div > tol_div:
        raise ConfigError(f"flow is not divergence-free (discrete divergence {div:.3g})")
    means = q.samples.reshape(-1, q.cell.dim).mean(axis=0)
    if np.max(np.abs(means)) > tol_mean:
        raise ConfigError(f"flow components must have zero cell mean, got {means.tolist()}")


TENSOR_KINDS = ("constant", "cosine_tensor")
VECTOR_KINDS = ("zero", "constant", "cellular", "shear")
SCALAR_KINDS = ("constant", "cosine")


def sample_field(expr: dict, cell: PeriodicCell, resolution, field_type: str | None = None,
                 allow_nonzero_mean: bool = False):
    """Sample a built-in coefficient family on the cell grid.

    ``field_type`` is one of "tensor", "vector", "scalar"; when omitted it is
    inferred from ``expr["kind"]`` (ambiguous "constant" defaults to tensor).
    ``allow_nonzero_mean`` is a test-only bypass for uniform drifts.
    """
    if not isinstance(expr, dict) or "kind" not in expr:
        raise ConfigError("field descriptor must be an object with a 'kind' key")
    resolution = _as_resolution(resolution, cell.dim)
    kind = expr["kind"]
    if field_type is None:
        if kind in ("cosine_tensor", "constant"):
            field_type = "tensor"
        elif kind in VECTOR_KINDS:
            field_type = "vector"
        elif kind in SCALAR_KINDS:
            field_type = "scalar"
        else:
            raise ConfigError(f"unknown field kind {kind!r}")
    x = cell.cell_grid(resolution).coordinates()
    if field_type == "tensor":
        if kind not in TENSOR_KINDS:
            raise ConfigError(f"unknown tensor family {kind!r}")
        a1, a2 = _tensor_bounds(expr, cell.dim)
        if not a1 > 0:
            raise ConfigError(f"diffusion tensor violates ellipticity: a1 = {a1} <= 0")
        A = TensorField(cell, resolution, _freeze(_tensor_values(expr, cell, x)), dict(expr), a1, a2)
        check_tensor(A)
        return A
    if field_type == "vector":
        if kind not in VECTOR_KINDS:
            raise ConfigError(f"unknown flow family {kind!r}")
        q = VectorField(cell, resolution, _freeze(_vector_values(expr, cell, x)), dict(expr))
        if kind == "constant" and not allow_nonzero_mean and np.any(q.samples != 0):
            raise ConfigError("a uniform nonzero drift violates the zero-mean flow hypothesis")
        if not allow_nonzero_mean:
            check_vector(q)
        return q
    if field_type == "scalar":
        if kind not in SCALAR_KINDS:
            raise ConfigError(f"unknown scalar family {kind!r}")
        lo, hi = _scalar_bounds(expr)
        return ScalarField(cell, resolution, _freeze(_scalar_values(expr, cell, x)), dict(expr), lo, hi)
    raise ConfigError(f"unknown field type {field_type!r}")


def tensor_from_samples(cell: PeriodicCell, samples: np.ndarray) -> TensorField:
    """Arbitrary sampled tensor; bounds estimated from the samples."""
    samples = np.asarray(samples, dtype=float)
    res = samples.shape[:-2]
    ev = np.linalg.eigvalsh(0.5 * (samples + np.swapaxes(samples, -1, -2)))
    a1, a2 = float(ev.min()), float(ev.max())
    if not a1 > 0:
        raise ConfigError(f"diffusion tensor violates ellipticity: a1 = {a1} <= 0")
    A = TensorField(cell, tuple(res), _freeze(samples), {"kind": "grid"}, a1, a2)
    check_tensor(A)
    return A


def vector_from_samples(cell: PeriodicCell, samples: np.ndarray, tol_div: float = 1e-8) -> VectorField:
    samples = np.asarray(samples, dtype=float)
    q = VectorField(cell, tuple(samples.shape[:-1]), _freeze(samples), {"kind": "grid"})
    check_vector(q, tol_div=tol_div)
    return q


def scalar_from_samples(cell: PeriodicCell, samples: np.ndarray) -> ScalarField:
    samples = np.asarray(samples, dtype=float)
    return ScalarField(cell, tuple(samples.shape), _freeze(samples), {"kind": "grid"},
                       float(samples.min()), float(samples.max()))


# ---------------------------------------------------------------------------
# medium

@dataclass(frozen=True, eq=False)
class PeriodicMedium:
    cell: PeriodicCell
    A: TensorField
    q: VectorField
    resolution: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.A.cell != self.cell or self.q.cell != self.cell:
            raise ConfigError("coefficient fields live on a different cell")
        if not self.resolution:
            object.__setattr__(self, "resolution", self.A.resolution)

    @property
    def dim(self) -> int:
        return self.cell.dim

    @property
    def a1(self) -> float:
        return self.A.a1

    @property
    def a2(self) -> float:
        return self.A.a2

    @property
    def is_homogeneous(self) -> bool:
        return self.A.expr.get("kind") == "constant" and self.q.expr.get("kind") in ("zero", "constant")

    def descriptor(self) -> dict:
        return {"cell": list(self.cell.lengths), "resolution": list(self.resolution),
                "diffusion": self.A.descriptor(), "advection": self.q.descriptor()}

    def hash(self) -> str:
        h = hashlib.sha256(json.dumps(self.descriptor(), sort_keys=True).encode())
        h.update(self.A.samples.tobytes())
        h.update(self.q.samples.tobytes())
        return h.hexdigest()[:16]

    @classmethod
    def from_descriptor(cls, d: dict, allow_nonzero_mean: bool = False) -> "PeriodicMedium":
        cell = PeriodicCell(tuple(d["cell"]))
        res = _as_resolution(d.get("resolution", 64), cell.dim)
        A = sample_field(d.get("diffusion", {"kind": "constant", "value": 1.0}), cell, res, "tensor")
        q = sample_field(d.get("advection", {"kind": "zero"}), cell, res, "vector",
                         allow_nonzero_mean=allow_nonzero_mean)
        return cls(cell, A, q, res)

    @classmethod
    def homogeneous(cls, dim: int = 1, matrix=None, cell_length: float = 1.0,
                    resolution: int = 16) -> "PeriodicMedium":
        """Constant coefficients; the period is arbitrary for such a medium."""
        expr = {"kind": "constant", "value": 1.0} if matrix is None else {
            "kind": "constant", "matrix": np.asarray(matrix, dtype=float).tolist()}
        return cls.from_descriptor({"cell": [cell_length] * dim, "resolution": resolution,
                                    "diffusion": expr, "advection": {"kind": "zero"}})


def describe(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True)
