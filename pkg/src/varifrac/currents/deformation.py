"""Piecewise-affine deformations on (possibly crack-duplicated) meshes.

Jumps are representable only across faces whose vertices were duplicated by
`duplicate_along`: every reference vertex whose incident elements split into
several fans across cracked edges gets one node per fan. Element ordering is
the reference mesh's, so element ids are shared between the reference mesh
and any of its duplications.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import factorial

import numpy as np
import structlog

from varifrac.core.exceptions import DimensionError, DomainValidationError, IdError
from varifrac.geometry.complex import SimplicialComplex

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class CrackedMesh:
    """Reference mesh with vertices duplicated across cracked facets.

    Attributes:
        reference: the uncracked body mesh
        nodes: (n_nodes, d) reference positions, duplicates appended after the originals
        elements: (m, d+1) node ids, row e corresponds to reference element e
        parent: (n_nodes,) reference vertex of each node
        duplicated_pairs: (p, 2) pairs (original node, copy)
        cracked: sorted reference facet ids the duplication was built from
    """

    reference: SimplicialComplex
    nodes: np.ndarray
    elements: np.ndarray
    parent: np.ndarray
    duplicated_pairs: np.ndarray
    cracked: tuple[int, ...] = ()

    @property
    def dim(self) -> int:
        return self.reference.ambient_dim

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @cached_property
    def topology_key(self) -> tuple:
        """Hashable signature of the duplicated connectivity."""
        return (self.node_count, self.elements.tobytes())

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        """Nodes whose parent lies on ∂B."""
        marks = self.reference.boundary_vertex_ids
        return np.array([i for i, p in enumerate(self.parent.tolist()) if p in marks], dtype=np.int64)


def uncracked(mesh: SimplicialComplex) -> CrackedMesh:
    d = mesh.ambient_dim
    n = len(mesh.vertices)
    return CrackedMesh(
        reference=mesh,
        nodes=mesh.vertices,
        elements=mesh.simplices[d],
        parent=np.arange(n),
        duplicated_pairs=np.zeros((0, 2), dtype=np.int64),
    )


def duplicate_along(mesh: SimplicialComplex, cracked_facets) -> CrackedMesh:
    """Split vertex fans across the given cracked facets.

    Elements around a vertex v are grouped into fans connected through
    uncracked facets containing v; the fan holding the lowest element keeps v
    and every other fan gets a new node.

    Args:
        mesh: d-dimensional body mesh
        cracked_facets: ids of (d-1)-simplices of `mesh`

    Raises:
        IdError: unknown facet id
    """
    d = mesh.ambient_dim
    if mesh.dim != d:
        raise DimensionError("Crack duplication needs a full-dimensional mesh", details={"dim": mesh.dim, "d": d})
    cracked = sorted({int(f) for f in cracked_facets})
    n_facets = mesh.count(d - 1)
    for f in cracked:
        if f < 0 or f >= n_facets:
            raise IdError("Unknown cracked facet id", details={"facet": f, "facet_count": n_facets})
    if not cracked:
        return uncracked(mesh)

    elements = mesh.simplices[d]
    lookup = mesh.facet_lookup
    cracked_keys = {tuple(sorted(mesh.simplices[d - 1][f].tolist())) for f in cracked}
    star = mesh.vertex_star[d]

    nodes = [row for row in mesh.vertices]
    parent = list(range(len(mesh.vertices)))
    new_elements = elements.copy()
    pairs = []

    for v in sorted(star):
        incident = star[v]
        if len(incident) < 2:
            continue
        # union-find over the elements around v
        root = {e: e for e in incident}

        def find(e: int) -> int:
            while root[e] != e:
                root[e] = root[root[e]]
                e = root[e]
            return e

        facet_owner: dict[tuple[int, ...], int] = {}
        for e in incident:
            for face in combinations(sorted(elements[e].tolist()), d):
                if v not in face or face in cracked_keys:
                    continue
                if face not in lookup:
                    continue
                if face in facet_owner:
                    a, b = find(facet_owner[face]), find(e)
                    if a != b:
                        root[max(a, b)] = min(a, b)
                else:
                    facet_owner[face] = e
        fans: dict[int, list[int]] = {}
        for e in incident:
            fans.setdefault(find(e), []).append(e)
        if len(fans) < 2:
            continue
        for fan_root in sorted(fans)[1:]:
            nodes.append(mesh.vertices[v])
            parent.append(v)
            copy = len(nodes) - 1
            pairs.append((v, copy))
            for e in fans[fan_root]:
                row = new_elements[e]
                row[row == v] = copy

    result = CrackedMesh(
        reference=mesh,
        nodes=np.array(nodes),
        elements=new_elements,
        parent=np.array(parent, dtype=np.int64),
        duplicated_pairs=np.array(pairs, dtype=np.int64).reshape(-1, 2),
        cracked=tuple(cracked),
    )
    logger.debug("mesh duplicated", cracked=len(cracked), duplicated_nodes=len(pairs))
    return result


@dataclass(frozen=True, eq=False)
class DeformationField:
    """Nodal values u on a cracked mesh; Du is constant per element.

    Attributes:
        mesh: crack-duplicated mesh
        values: (n_nodes, d) deformed positions u(x)
        K: optional sup-norm bound, max |u_i| <= K component-wise
    """

    mesh: CrackedMesh
    values: np.ndarray
    K: float | None = field(default=None)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.shape != self.mesh.nodes.shape:
            raise DimensionError(
                "Deformation values do not match mesh nodes",
                details={"values": list(values.shape), "nodes": list(self.mesh.nodes.shape)},
            )
        if self.K is not None and self.sup_norm > self.K + 1e-12:
            raise DomainValidationError("Deformation exceeds the sup-norm bound K", details={"sup": self.sup_norm, "K": self.K})

    @classmethod
    def identity(cls, mesh: CrackedMesh | SimplicialComplex, K: float | None = None) -> "DeformationField":
        cm = mesh if isinstance(mesh, CrackedMesh) else uncracked(mesh)
        return cls(mesh=cm, values=cm.nodes.copy(), K=K)

    @classmethod
    def from_function(cls, mesh: CrackedMesh | SimplicialComplex, fn, K: float | None = None) -> "DeformationField":
        """u = fn(reference positions), fn vectorized over an (n, d) array."""
        cm = mesh if isinstance(mesh, CrackedMesh) else uncracked(mesh)
        return cls(mesh=cm, values=np.asarray(fn(cm.nodes), dtype=float), K=K)

    @classmethod
    def from_sides(cls, mesh: CrackedMesh, fn, K: float | None = None) -> "DeformationField":
        """u = fn(positions, sides) where sides[i] is the centroid of an element using node i.

        Lets fixtures prescribe different values on the two lips of a crack.
        """
        centroids = mesh.nodes[mesh.elements].mean(axis=1)
        sides = np.zeros_like(mesh.nodes)
        seen = np.zeros(mesh.node_count, dtype=bool)
        for e, row in enumerate(mesh.elements.tolist()):
            for a in row:
                if not seen[a]:
                    sides[a] = centroids[e]
                    seen[a] = True
        return cls(mesh=mesh, values=np.asarray(fn(mesh.nodes, sides), dtype=float), K=K)

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @cached_property
    def reference_jacobians(self) -> np.ndarray:
        """(m, d, d) edge matrices of the reference elements (columns x_a - x_0)."""
        pts = self.mesh.nodes[self.mesh.elements]
        return np.swapaxes(pts[:, 1:, :] - pts[:, :1, :], 1, 2)

    @cached_property
    def volumes(self) -> np.ndarray:
        return np.abs(np.linalg.det(self.reference_jacobians)) / factorial(self.dim)

    @cached_property
    def shape_gradients(self) -> np.ndarray:
        """(m, d+1, d) gradients of the barycentric coordinates per element."""
        inv = np.linalg.inv(self.reference_jacobians)       # rows: ∇λ_1..∇λ_d
        grads = np.concatenate([-inv.sum(axis=1, keepdims=True), inv], axis=1)
        return grads

    @cached_property
    def gradients(self) -> np.ndarray:
        """(m, d, d) Du per element, exact for the affine interpolant."""
        vals = self.values[self.mesh.elements]                # (m, d+1, d)
        return np.einsum("mai,maj->mij", vals, self.shape_gradients)

    @cached_property
    def determinants(self) -> np.ndarray:
        return np.linalg.det(self.gradients)

    def at(self, elements: np.ndarray, bary: np.ndarray) -> np.ndarray:
        """u at barycentric points: elements (q,), bary (q, d+1)."""
        vals = self.values[self.mesh.elements[elements]]
        return np.einsum("qa,qai->qi", bary, vals)

    def with_values(self, values: np.ndarray) -> "DeformationField":
        return DeformationField(mesh=self.mesh, values=values, K=self.K)


def jump_norm(u: DeformationField) -> float:
    """max |u_a - u_b| over duplicated node pairs (0 for continuous u)."""
    pairs = u.mesh.duplicated_pairs
    if len(pairs) == 0:
        return 0.0
    diffs = u.values[pairs[:, 0]] - u.values[pairs[:, 1]]
    return float(np.max(np.linalg.norm(diffs, axis=1)))
