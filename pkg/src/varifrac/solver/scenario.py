"""Scenario files (TOML).

    [mesh]        path = "mesh.json"  |  rectangle = {nx, ny, width, height, origin}
    [node_sets]   name = {ids = [...]}  |  name = {box = [[xmin, ymin], [xmax, ymax]]}
    [load]        steps = [{name = [dx, dy], ...}, ...]  |  ramp = {set, direction, start, stop, increment}
    [pre_crack]   segments = [[[x0, y0], [x1, y1]], ...], edges = [...]
    [energy] [material] [solver]   settings overrides
"""

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from varifrac.core.exceptions import ConfigurationError, DomainValidationError
from varifrac.energy.config import CoefficientsConfig, MaterialConfig
from varifrac.geometry.complex import SimplicialComplex
from varifrac.geometry.dto import complex_from_mesh_json
from varifrac.geometry.fixtures import rectangle_mesh
from varifrac.solver.config import MinimizationConfig
from varifrac.solver.state import CrackState, LoadProgram

logger = structlog.get_logger(__name__)

POINT_TOL = 1e-9


class RectangleDTO(BaseModel):
    model_config = ConfigDict(extra="forbid")

    nx: int = Field(..., ge=1)
    ny: int = Field(..., ge=1)
    width: float = Field(default=1.0, gt=0.0)
    height: float = Field(default=1.0, gt=0.0)
    origin: tuple[float, float] = (0.0, 0.0)


class MeshSourceDTO(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str | None = None
    rectangle: RectangleDTO | None = None

    @model_validator(mode="after")
    def exactly_one(self):
        if (self.path is None) == (self.rectangle is None):
            raise ValueError("mesh needs exactly one of 'path' or 'rectangle'")
        return self


class NodeSetDTO(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ids: list[int] | None = None
    box: tuple[list[float], list[float]] | None = None

    @model_validator(mode="after")
    def exactly_one(self):
        if (self.ids is None) == (self.box is None):
            raise ValueError("node set needs exactly one of 'ids' or 'box'")
        return self

    def resolve(self, mesh: SimplicialComplex) -> np.ndarray:
        if self.ids is not None:
            return np.array(sorted(set(self.ids)), dtype=np.int64)
        lo = np.asarray(self.box[0], dtype=float) - POINT_TOL
        hi = np.asarray(self.box[1], dtype=float) + POINT_TOL
        inside = np.all((mesh.vertices >= lo) & (mesh.vertices <= hi), axis=1)
        return np.flatnonzero(inside)


class RampDTO(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    node_set: str = Field(..., alias="set")
    direction: list[float]
    start: float = 0.0
    stop: float
    increment: float = Field(..., gt=0.0)

    def amplitudes(self) -> np.ndarray:
        count = int(round((self.stop - self.start) / self.increment)) + 1
        return self.start + self.increment * np.arange(max(count, 1))


class LoadDTO(BaseModel):
    model_config = ConfigDict(extra="forbid")

    steps: list[dict[str, list[float]]] | None = None
    ramp: RampDTO | None = None

    @model_validator(mode="after")
    def exactly_one(self):
        if (self.steps is None) == (self.ramp is None):
            raise ValueError("load needs exactly one of 'steps' or 'ramp'")
        return self


class PreCrackDTO(BaseModel):
    model_config = ConfigDict(extra="forbid")

    segments: list[tuple[list[float], list[float]]] = Field(default_factory=list)
    edges: list[int] = Field(default_factory=list)


class ScenarioDTO(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mesh: MeshSourceDTO
    node_sets: dict[str, NodeSetDTO] = Field(..., min_length=1)
    load: LoadDTO
    pre_crack: PreCrackDTO = Field(default_factory=PreCrackDTO)
    energy: dict[str, Any] = Field(default_factory=dict)
    material: dict[str, Any] = Field(default_factory=dict)
    solver: dict[str, Any] = Field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Scenario:
    program: LoadProgram
    coefficients: CoefficientsConfig
    material: MaterialConfig
    solver: MinimizationConfig
    source: Path | None = None


def edges_on_segments(mesh: SimplicialComplex, segments) -> list[int]:
    """Edges with both endpoints on one of the segments."""
    chosen = []
    edges = mesh.simplices[1]
    for a, b in segments:
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        ab = b - a
        length2 = float(ab @ ab)
        if length2 == 0.0:
            continue
        t = (mesh.vertices - a) @ ab / length2
        off = np.linalg.norm(mesh.vertices - a - np.outer(t, ab), axis=1)
        on = (off <= POINT_TOL * max(1.0, length2**0.5)) & (t >= -POINT_TOL) & (t <= 1.0 + POINT_TOL)
        chosen += [i for i, (p, q) in enumerate(edges.tolist()) if on[p] and on[q]]
    return sorted(set(chosen))


def _validation_message(err: ValidationError, where: str) -> tuple[str, list[dict]]:
    errors = err.errors(include_url=False)
    keys = [".".join(str(p) for p in e["loc"]) for e in errors]
    missing = [k for k, e in zip(keys, errors) if e["type"] == "missing"]
    if missing:
        return f"{where} is missing keys: {', '.join(missing)}", errors
    return f"{where} has invalid values: {', '.join(keys)}", errors


def settings_from_section(cls, values: dict, where: str):
    try:
        return cls(**values)
    except ValidationError as e:
        message, errors = _validation_message(e, where)
        raise ConfigurationError(message, details={"section": where, "validation_errors": errors}) from e


def read_toml(path: str | Path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as e:
        raise ConfigurationError(f"Cannot read {path}: {e.strerror}", details={"path": str(path)}) from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"Malformed TOML in {path}: {e}", details={"path": str(path)}) from e


def build_scenario(raw: dict, base_dir: Path | None = None, overrides: dict | None = None, source: Path | None = None) -> Scenario:
    """Validate a decoded scenario and assemble its load program.

    `overrides` carries [energy], [material] and [solver] sections of a --config
    file; they win over the scenario's own values.

    Raises:
        ConfigurationError: missing keys or invalid values
    """
    where = str(source) if source is not None else "scenario"
    try:
        dto = ScenarioDTO.model_validate(raw)
    except ValidationError as e:
        message, errors = _validation_message(e, where)
        raise ConfigurationError(message, details={"path": where, "validation_errors": errors}) from e

    if dto.mesh.path is not None:
        mesh_path = Path(dto.mesh.path)
        if base_dir is not None and not mesh_path.is_absolute():
            mesh_path = base_dir / mesh_path
        mesh = complex_from_mesh_json(mesh_path)
    else:
        r = dto.mesh.rectangle
        mesh = rectangle_mesh(r.nx, r.ny, r.width, r.height, r.origin)
    if mesh.ambient_dim != 2 or mesh.dim != 2:
        raise ConfigurationError("Scenarios need a 2-d triangle mesh", details={"path": where})

    node_sets = {name: ns.resolve(mesh) for name, ns in dto.node_sets.items()}
    if dto.load.steps is not None:
        steps = [{k: np.asarray(v, dtype=float) for k, v in s.items()} for s in dto.load.steps]
    else:
        ramp = dto.load.ramp
        if ramp.node_set not in node_sets:
            raise ConfigurationError("Ramp refers to an unknown node set", details={"set": ramp.node_set})
        direction = np.asarray(ramp.direction, dtype=float)
        steps = [{ramp.node_set: a * direction} for a in ramp.amplitudes()]

    overrides = overrides or {}
    coefficients = settings_from_section(CoefficientsConfig, {**dto.energy, **overrides.get("energy", {})}, "energy")
    material = settings_from_section(MaterialConfig, {**dto.material, **overrides.get("material", {})}, "material")
    solver = settings_from_section(MinimizationConfig, {**dto.solver, **overrides.get("solver", {})}, "solver")

    pre = sorted(set(dto.pre_crack.edges) | set(edges_on_segments(mesh, dto.pre_crack.segments)))
    comparison = None
    if pre:
        comparison = CrackState.build(mesh, pre, coefficients.p.get(1, 2.0)).family
    try:
        program = LoadProgram(mesh=mesh, node_sets=node_sets, steps=steps, initial_crack=tuple(pre), comparison=comparison)
    except DomainValidationError as e:
        raise ConfigurationError(e.message, details={"path": where, **e.details}) from e
    logger.info("scenario loaded", path=where, steps=len(program), node_sets=list(node_sets), pre_crack_edges=len(pre))
    return Scenario(program=program, coefficients=coefficients, material=material, solver=solver, source=source)


def load_scenario(path: str | Path, overrides: dict | None = None) -> Scenario:
    path = Path(path)
    return build_scenario(read_toml(path), base_dir=path.parent, overrides=overrides, source=path)
