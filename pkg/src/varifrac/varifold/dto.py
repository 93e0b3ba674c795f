"""Varifold dump DTOs.

Dump format: {"k", "atoms": [{"x", "pi", "w", "theta"}], "A", "dV"}, with an
optional "support" block (vertices + k-simplices + atom -> simplex map) so that
a loaded varifold can be matched against a mesh.
"""

from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from varifrac.core.exceptions import MeshParseError
from varifrac.geometry.complex import SimplicialComplex
from varifrac.geometry.dto import read_json
from varifrac.varifold.model import BoundaryMeasure, CurvatureField, DiscreteVarifold


class AtomDTO(BaseModel):
    x: list[float]
    pi: list[list[float]]
    w: float = Field(..., gt=0.0)
    theta: int = Field(..., ge=1)


class BoundaryAtomDTO(BaseModel):
    x: list[float]
    pi: list[list[float]]
    b: list[float]


class SupportDTO(BaseModel):
    vertices: list[list[float]]
    simplices: list[list[int]]
    simplex_index: list[int]


class VarifoldDumpDTO(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: int = Field(..., ge=1, le=2)
    atoms: list[AtomDTO] = Field(default_factory=list)
    A: list[list[list[list[float]]]] | None = None
    dV: list[BoundaryAtomDTO] | None = None
    support: SupportDTO | None = None

    @classmethod
    def from_domain(
        cls,
        V: DiscreteVarifold,
        A: CurvatureField | None = None,
        dV: BoundaryMeasure | None = None,
    ) -> "VarifoldDumpDTO":
        support = None
        if V.support is not None and V.simplex_index is not None and not V.is_empty:
            support = SupportDTO(
                vertices=V.support.vertices.tolist(),
                simplices=V.support.simplices[V.k].tolist(),
                simplex_index=V.simplex_index.tolist(),
            )
        return cls(
            k=V.k,
            atoms=[
                AtomDTO(x=V.x[i].tolist(), pi=V.proj[i].tolist(), w=float(V.weight[i]), theta=int(V.theta[i]))
                for i in range(len(V))
            ],
            A=A.tensor.tolist() if A is not None else None,
            dV=[
                BoundaryAtomDTO(x=dV.x[i].tolist(), pi=dV.proj[i].tolist(), b=dV.b[i].tolist())
                for i in range(len(dV))
            ] if dV is not None else None,
            support=support,
        )

    def to_domain(self, d: int | None = None) -> tuple[DiscreteVarifold, CurvatureField | None, BoundaryMeasure | None]:
        if self.atoms:
            d = len(self.atoms[0].x)
        elif d is None:
            d = len(self.support.vertices[0]) if self.support and self.support.vertices else 2
        support = None
        simplex_index = None
        if self.support is not None:
            support = SimplicialComplex.from_simplices(
                np.array(self.support.vertices),
                {self.k: self.support.simplices},
            )
            simplex_index = np.array(self.support.simplex_index, dtype=np.int64)
        if self.atoms:
            V = DiscreteVarifold(
                k=self.k,
                x=np.array([a.x for a in self.atoms]),
                proj=np.array([a.pi for a in self.atoms]),
                weight=np.array([a.w for a in self.atoms]),
                theta=np.array([a.theta for a in self.atoms]),
                support=support,
                simplex_index=simplex_index,
            )
        else:
            V = DiscreteVarifold.empty(self.k, d, support=support)
        A = CurvatureField(tensor=np.array(self.A).reshape(len(V), d, d, d)) if self.A is not None else None
        dV = None
        if self.dV is not None:
            dV = BoundaryMeasure(
                x=np.array([a.x for a in self.dV]).reshape(len(self.dV), d),
                proj=np.array([a.pi for a in self.dV]).reshape(len(self.dV), d, d),
                b=np.array([a.b for a in self.dV]).reshape(len(self.dV), d),
            )
        return V, A, dV


def dump_varifold(
    V: DiscreteVarifold,
    A: CurvatureField | None = None,
    dV: BoundaryMeasure | None = None,
) -> str:
    return VarifoldDumpDTO.from_domain(V, A, dV).model_dump_json(indent=2, exclude_none=True)


def load_varifold(source: str | Path | dict) -> tuple[DiscreteVarifold, CurvatureField | None, BoundaryMeasure | None]:
    if isinstance(source, dict):
        raw, name = source, "<dict>"
    else:
        raw, name = read_json(source), str(source)
    try:
        dto = VarifoldDumpDTO.model_validate(raw)
    except ValidationError as e:
        raise MeshParseError(
            f"Varifold {name} does not match the dump schema",
            details={"path": name, "validation_errors": e.errors(include_url=False)},
        ) from e
    return dto.to_domain()
