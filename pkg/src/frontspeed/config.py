"""JSON run configuration: schema validation, defaults and object builders."""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .core import Direction, PeriodicMedium, directions_on_circle
from .errors import ConfigError
from .nonlinearity import Nonlinearity, nonlinearity_from_descriptor


def load_schema() -> dict:
    text = resources.files("frontspeed").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


@dataclass
class EigenConfig:
    bracket: tuple[float, float] = (1e-3, 20.0)
    resolution: int | list[int] | None = None
    method: str = "inverse"
    tol: float = 1e-7
    lambdas: list[float] = field(default_factory=list)


@dataclass
class SimulationConfig:
    h: float | None = None
    t_end: float = 40.0
    level: float = 0.5
    levels: list[float] = field(default_factory=list)
    transient_cut: float = 0.4
    cadence: float = 0.5
    C: float = 0.0
    K: float = 5.0
    mu: float | None = None
    fit: str = "auto"
    snapshots: bool = False


@dataclass
class ScanConfig:
    method: str = "eigen_lin"
    n_samples: int = 16
    eps: float | None = None
    refine: bool = True


@dataclass
class ApproxConfig:
    eps: list[float] = field(default_factory=lambda: [0.2, 0.1, 0.05])
    reference: list[float] | None = None


@dataclass
class SupersolutionConfig:
    directions: int = 16
    t_window: tuple[float, float] = (0.0, 5.0)
    lam: float | None = None


@dataclass
class LowerBoundConfig:
    eps: float = 0.1
    t_end: float = 20.0


@dataclass
class ValidateConfig:
    alpha: float = 0.4
    delta: float = 0.05
    gate: float = 4.0
    references: str | list[float] = "eigen_lin"
    supersolution: SupersolutionConfig = field(default_factory=SupersolutionConfig)
    lower_bound: LowerBoundConfig = field(default_factory=LowerBoundConfig)


@dataclass
class ProfileConfig:
    angle: float = 0.0
    boundary_margin: int = 20
    transient_cut: float = 0.7


@dataclass
class RunConfig:
    medium: dict
    nonlinearity: dict
    name: str = ""
    directions: dict = field(default_factory=lambda: {"count": 8})
    eigen: EigenConfig = field(default_factory=EigenConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    approx: ApproxConfig = field(default_factory=ApproxConfig)
    validate: ValidateConfig = field(default_factory=ValidateConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)

    def resolved(self) -> dict:
        return asdict(self)

    def build_medium(self) -> PeriodicMedium:
        return PeriodicMedium.from_descriptor(self.medium)

    def build_nonlinearity(self, medium: PeriodicMedium) -> Nonlinearity:
        return nonlinearity_from_descriptor(self.nonlinearity, medium.cell)

    def build_directions(self, dim: int) -> list[Direction]:
        if "angles" in self.directions:
            return [Direction.from_angle(a, dim) for a in self.directions["angles"]]
        if dim == 1:
            return directions_on_circle(2, 1)
        return directions_on_circle(int(self.directions.get("count", 8)), dim)

    def eigen_kwargs(self) -> dict:
        e = self.eigen
        return {"bracket": tuple(e.bracket), "resolution": e.resolution, "tol": e.tol,
                "method": e.method}

    def sim_kwargs(self) -> dict:
        s = self.simulation
        out = {"t_end": s.t_end, "h": s.h, "level": s.level, "transient_cut": s.transient_cut,
               "cadence": s.cadence}
        if s.fit != "auto":
            out["model"] = s.fit
        if s.levels:
            out["levels"] = tuple(s.levels)
        return out


def _key_before(text: str, pos: int) -> str | None:
    keys = re.findall(r'"([^"\\]*)"\s*:', text[:pos])
    return keys[-1] if keys else None


def _path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<root>"


def validate_config(data) -> None:
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), e.message))
    if errors:
        err = errors[0]
        if err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            where = _path(err)
            raise ConfigError(f"unknown key {extra[0]!r} in {where}" if extra else err.message)
        raise ConfigError(f"invalid value at {_path(err)}: {err.message}")


def _section(cls, data: dict | None, renames: dict | None = None):
    data = dict(data or {})
    for old, new in (renames or {}).items():
        if old in data:
            data[new] = data.pop(old)
    return cls(**data)


def config_from_dict(data: dict) -> RunConfig:
    validate_config(data)
    v = dict(data.get("validate", {}))
    sup = _section(SupersolutionConfig, v.pop("supersolution", None), {"lambda": "lam"})
    if isinstance(sup.t_window, list):
        sup.t_window = tuple(sup.t_window)
    low = _section(LowerBoundConfig, v.pop("lower_bound", None))
    eig = _section(EigenConfig, data.get("eigen"))
    eig.bracket = tuple(eig.bracket)
    return RunConfig(
        medium=data["medium"], nonlinearity=data["nonlinearity"], name=data.get("name", ""),
        directions=data.get("directions", {"count": 8}), eigen=eig,
        simulation=_section(SimulationConfig, data.get("simulation")),
        scan=_section(ScanConfig, data.get("scan")),
        approx=_section(ApproxConfig, data.get("approx")),
        validate=ValidateConfig(supersolution=sup, lower_bound=low, **v),
        profile=_section(ProfileConfig, data.get("profile")))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        key = _key_before(text, exc.pos)
        near = f" after key {key!r}" if key else ""
        raise ConfigError(f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}"
                          f"{near}: {exc.msg}") from exc
    return config_from_dict(data)
