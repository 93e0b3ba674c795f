"""Deformation JSON DTOs.

Format: {"dim": d, "cracked_edges": [facet ids of the mesh], "values": [[u_1..u_d], ...], "K": optional}.
Node order is the one `duplicate_along` produces for `cracked_edges`: the
mesh vertices first, then one copy per extra fan in increasing vertex order.
"""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from varifrac.core.exceptions import MeshError, MeshParseError
from varifrac.currents.deformation import DeformationField, duplicate_along
from varifrac.geometry.complex import SimplicialComplex
from varifrac.geometry.dto import read_json


class DeformationDTO(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dim: int = Field(..., ge=2, le=3)
    cracked_edges: list[int] = Field(default_factory=list)
    values: list[list[float]] = Field(..., min_length=1)
    K: float | None = Field(default=None, gt=0.0)

    def to_domain(self, mesh: SimplicialComplex) -> DeformationField:
        """Raises MeshError when the values do not fit the (duplicated) mesh."""
        if mesh.ambient_dim != self.dim:
            raise MeshError("Deformation and mesh dimensions differ", details={"deformation": self.dim, "mesh": mesh.ambient_dim})
        cracked = duplicate_along(mesh, self.cracked_edges)
        if len(self.values) != cracked.node_count or any(len(v) != self.dim for v in self.values):
            raise MeshError(
                "Deformation values do not match the mesh nodes",
                details={"values": len(self.values), "nodes": cracked.node_count, "cracked_edges": len(self.cracked_edges)},
            )
        return DeformationField(mesh=cracked, values=self.values, K=self.K)

    @classmethod
    def from_domain(cls, u: DeformationField) -> "DeformationDTO":
        return cls(dim=u.dim, cracked_edges=list(u.mesh.cracked), values=u.values.tolist(), K=u.K)


def load_deformation(source: str | Path | dict, mesh: SimplicialComplex) -> DeformationField:
    if isinstance(source, dict):
        raw, name = source, "<dict>"
    else:
        raw, name = read_json(source), str(source)
    try:
        dto = DeformationDTO.model_validate(raw)
    except ValidationError as e:
        raise MeshParseError(
            f"Deformation {name} does not match the deformation schema",
            details={"path": name, "validation_errors": e.errors(include_url=False)},
        ) from e
    return dto.to_domain(mesh)


def dump_deformation(u: DeformationField) -> str:
    return DeformationDTO.from_domain(u).model_dump_json(indent=2, exclude_none=True)
