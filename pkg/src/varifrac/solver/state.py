"""Crack states, load programs and quasistatic trajectory records."""

from dataclasses import dataclass, field
from functools import cached_property
from math import fsum

import numpy as np
from pydantic import BaseModel

from varifrac.core.exceptions import DomainValidationError, IdError
from varifrac.currents.admissibility import AdmissibilityReport
from varifrac.currents.deformation import CrackedMesh, DeformationField, duplicate_along
from varifrac.energy.breakdown import EnergyBreakdown
from varifrac.geometry.complex import SimplicialComplex, edge_subcomplex
from varifrac.varifold.construction import from_complex
from varifrac.varifold.family import build_family
from varifrac.varifold.model import DiscreteVarifold, StratifiedFamily


@dataclass(frozen=True, eq=False)
class CrackState:
    """Cracked edge set of a 2-d body with its duplicated mesh and V_1 (θ = 1)."""

    mesh: SimplicialComplex
    cracked: tuple[int, ...]
    cracked_mesh: CrackedMesh
    family: StratifiedFamily

    @classmethod
    def build(cls, mesh: SimplicialComplex, cracked=(), exponent: float = 2.0) -> "CrackState":
        edges = tuple(sorted({int(e) for e in cracked}))
        n_edges = mesh.count(1)
        for e in edges:
            if e < 0 or e >= n_edges:
                raise IdError("Unknown edge id in crack", details={"edge": e, "edge_count": n_edges})
        interior = set(mesh.interior_edge_ids)
        cracked_mesh = duplicate_along(mesh, [e for e in edges if e in interior])
        V1 = from_complex(edge_subcomplex(mesh, edges), k=1)
        family = build_family(mesh.ambient_dim, {1: V1}, exponents={1: exponent}, body=mesh)
        return cls(mesh=mesh, cracked=edges, cracked_mesh=cracked_mesh, family=family)

    def extended(self, new_edges) -> "CrackState":
        return CrackState.build(self.mesh, self.cracked + tuple(new_edges), self.family.exponent(1))

    @property
    def V1(self) -> DiscreteVarifold:
        return self.family.varifolds[1]

    @property
    def is_empty(self) -> bool:
        return not self.cracked

    @property
    def crack_length(self) -> float:
        if not self.cracked:
            return 0.0
        return fsum(self.mesh.measures(1)[list(self.cracked)].tolist())

    @cached_property
    def tips(self) -> tuple[int, ...]:
        """Odd-incidence crack vertices not on ∂B."""
        counts: dict[int, int] = {}
        for a, b in self.mesh.simplices[1][list(self.cracked)].tolist():
            counts[a] = counts.get(a, 0) + 1
            counts[b] = counts.get(b, 0) + 1
        boundary = self.mesh.boundary_vertex_ids
        return tuple(v for v in sorted(counts) if counts[v] % 2 == 1 and v not in boundary)

    @property
    def topology_key(self) -> tuple:
        return self.cracked_mesh.topology_key


@dataclass(frozen=True, eq=False)
class LoadProgram:
    """Dirichlet data u = x + displacement on named reference-vertex sets, per step.

    Attributes:
        mesh: 2-d body mesh
        node_sets: name -> reference vertex ids of ∂B_u
        steps: per step, name -> displacement (d,)
        initial_crack: edge ids cracked before the first step
        comparison: Ṽ family the trajectory must dominate
    """

    mesh: SimplicialComplex
    node_sets: dict[str, np.ndarray]
    steps: list[dict[str, np.ndarray]]
    initial_crack: tuple[int, ...] = ()
    comparison: StratifiedFamily | None = None

    def __post_init__(self):
        if not self.node_sets or all(len(v) == 0 for v in self.node_sets.values()):
            raise DomainValidationError("Load program needs a nonempty Dirichlet node set")
        if not self.steps:
            raise DomainValidationError("Load program needs at least one step")
        d = self.mesh.ambient_dim
        n = len(self.mesh.vertices)
        for name, ids in self.node_sets.items():
            ids = np.asarray(ids, dtype=np.int64)
            if ids.size and (ids.min() < 0 or ids.max() >= n):
                raise IdError("Node set refers to unknown vertices", details={"set": name})
        for i, step in enumerate(self.steps):
            for name, disp in step.items():
                if name not in self.node_sets:
                    raise DomainValidationError("Step refers to an unknown node set", details={"step": i + 1, "set": name})
                if np.shape(disp) != (d,):
                    raise DomainValidationError("Displacement must have d components", details={"step": i + 1, "set": name})

    def __len__(self) -> int:
        return len(self.steps)

    @cached_property
    def clamped_edges(self) -> dict[int, list[int]]:
        """Reference vertex -> boundary edges with both ends clamped."""
        clamped = {int(v) for ids in self.node_sets.values() for v in np.asarray(ids).ravel()}
        edges = self.mesh.simplices[1]
        per_vertex: dict[int, list[int]] = {}
        for e in sorted(self.mesh.computed_boundary_facets):
            a, b = (int(v) for v in edges[e])
            if a in clamped and b in clamped:
                per_vertex.setdefault(a, []).append(e)
                per_vertex.setdefault(b, []).append(e)
        return per_vertex

    def released_vertices(self, crack: CrackState) -> frozenset[int]:
        """Clamped vertices whose clamped boundary edges are all cracked."""
        cracked = set(crack.cracked)
        return frozenset(v for v, edges in self.clamped_edges.items() if all(e in cracked for e in edges))

    def dirichlet(self, step: int, crack: CrackState) -> tuple[np.ndarray, np.ndarray]:
        """Fixed node ids of the cracked mesh and their prescribed values at step (1-based)."""
        data = self.steps[step - 1]
        released = self.released_vertices(crack)
        parent = crack.cracked_mesh.parent
        prescribed: dict[int, np.ndarray] = {}
        for name, ids in self.node_sets.items():
            disp = np.asarray(data.get(name, np.zeros(self.mesh.ambient_dim)), dtype=float)
            for v in np.asarray(ids, dtype=np.int64).tolist():
                if v not in released:
                    prescribed[v] = self.mesh.vertices[v] + disp
        nodes = np.array([i for i, p in enumerate(parent.tolist()) if p in prescribed], dtype=np.int64)
        values = np.array([prescribed[int(parent[i])] for i in nodes]).reshape(-1, self.mesh.ambient_dim)
        return nodes, values


@dataclass
class QuasistaticState:
    step: int
    crack: CrackState
    u: DeformationField
    energy: EnergyBreakdown
    dissipation: float = 0.0
    inner_totals: list[float] = field(default_factory=list)
    admissibility: AdmissibilityReport | None = None
    accepted_moves: list[tuple[int, ...]] = field(default_factory=list)
    # items (iii)-(v) failed by a state kept without accepted moves
    inadmissible: list[str] = field(default_factory=list)


class TrajectoryRow(BaseModel):
    """One CSV row; field order is the column order."""

    step: int
    bulk: float
    curvature1: float
    surface1: float
    corner: float
    total: float
    crack_length: float
    dissipation: float

    @classmethod
    def from_state(cls, state: QuasistaticState) -> "TrajectoryRow":
        e = state.energy
        return cls(
            step=state.step,
            bulk=e.bulk,
            curvature1=e.curvature.get(1, 0.0),
            surface1=e.surface_mass.get(1, 0.0),
            corner=e.corner,
            total=e.total,
            crack_length=state.crack.crack_length,
            dissipation=state.dissipation,
        )
