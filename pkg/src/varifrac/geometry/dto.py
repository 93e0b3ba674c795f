"""Mesh JSON DTOs.

Raw structures read from mesh files. The DTO knows how to turn itself into a
SimplicialComplex and back (explicit, type-safe).
"""

import json
from pathlib import Path
from typing import Any

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from varifrac.core.exceptions import MeshParseError
from varifrac.geometry.complex import SimplicialComplex

logger = structlog.get_logger(__name__)


class MeshDTO(BaseModel):
    """Mesh file schema: {"dim", "vertices", "edges", "triangles", "boundary_edges"}."""

    model_config = ConfigDict(extra="forbid")

    dim: int = Field(..., ge=2, le=3, description="Ambient dimension")
    vertices: list[list[float]] = Field(..., min_length=1)
    edges: list[tuple[int, int]] = Field(default_factory=list)
    triangles: list[tuple[int, int, int]] = Field(default_factory=list)
    boundary_edges: list[tuple[int, int]] = Field(default_factory=list)

    @model_validator(mode="after")
    def ids_in_range(self):
        n = len(self.vertices)
        for v in self.vertices:
            if len(v) != self.dim:
                raise ValueError(f"vertex {v} does not have {self.dim} coordinates")
        for name in ("edges", "triangles", "boundary_edges"):
            for row in getattr(self, name):
                if any(i < 0 or i >= n for i in row):
                    raise ValueError(f"{name} entry {list(row)} references a vertex outside 0..{n - 1}")
        return self

    def to_complex(self) -> SimplicialComplex:
        given: dict[int, list] = {0: [(i,) for i in range(len(self.vertices))]}
        if self.edges:
            given[1] = [list(e) for e in self.edges]
        if self.triangles:
            given[2] = [list(t) for t in self.triangles]
        boundary = None
        if self.boundary_edges and self.dim == 2:
            boundary = [list(e) for e in self.boundary_edges]
        return SimplicialComplex.from_simplices(self.vertices, given, boundary_facets=boundary)

    @classmethod
    def from_complex(cls, complex_: SimplicialComplex) -> "MeshDTO":
        d = complex_.ambient_dim
        boundary: list[tuple[int, int]] = []
        if d == 2 and complex_.count(2):
            edges = complex_.simplices[1]
            boundary = [tuple(edges[i].tolist()) for i in sorted(complex_.computed_boundary_facets)]
        return cls(
            dim=d,
            vertices=complex_.vertices.tolist(),
            edges=[tuple(e) for e in complex_.simplices[1].tolist()] if complex_.count(1) else [],
            triangles=[tuple(t) for t in complex_.simplices[2].tolist()] if complex_.count(2) else [],
            boundary_edges=boundary,
        )


def parse_json_text(text: str, source: str) -> Any:
    """json.loads with failures reported as MeshParseError (line, column, byte offset)."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        offset = len(text[: e.pos].encode("utf-8"))
        raise MeshParseError(
            f"Malformed JSON in {source} at line {e.lineno}, column {e.colno} (byte offset {offset}): {e.msg}",
            details={"path": source, "line": e.lineno, "column": e.colno, "offset": offset},
        ) from e


def read_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise MeshParseError(f"Cannot read {path}: {e.strerror}", details={"path": str(path)}) from e
    return parse_json_text(text, str(path))


def complex_from_mesh_json(source: str | Path | dict) -> SimplicialComplex:
    """Build a SimplicialComplex from a mesh JSON file or an already-decoded dict."""
    if isinstance(source, dict):
        raw, name = source, "<dict>"
    else:
        raw, name = read_json(source), str(source)
    try:
        dto = MeshDTO.model_validate(raw)
    except ValidationError as e:
        raise MeshParseError(
            f"Mesh {name} does not match the mesh schema",
            details={"path": name, "validation_errors": e.errors(include_url=False)},
        ) from e
    complex_ = dto.to_complex()
    logger.debug(
        "mesh loaded",
        path=name,
        dim=dto.dim,
        vertices=len(dto.vertices),
        triangles=len(dto.triangles),
    )
    return complex_


def write_mesh_json(complex_: SimplicialComplex, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(MeshDTO.from_complex(complex_).model_dump_json(indent=2), encoding="utf-8")
    return path
