"""Simplicial complexes for the body B and for candidate crack supports.

Vertices are shared between a complex and every subcomplex extracted from it,
so vertex ids keep their meaning across the mesh, the crack support and the
varifolds built on top of them. Simplices are stored per dimension as integer
arrays; a simplex id is the pair (dimension, row).
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import factorial
from typing import Iterable, Sequence

import numpy as np
import structlog

from varifrac.core.exceptions import DegenerateSimplexError, DimensionError, IdError
from varifrac.geometry.grassmann import GrassmannPoint, span_projections

logger = structlog.get_logger(__name__)

MEASURE_TOL = 1e-14

SimplexId = tuple[int, int]


@dataclass(frozen=True)
class HausdorffMeasureValue:
    """k-dimensional Hausdorff measure of a set (model-length^k)."""

    value: float

    def __post_init__(self):
        if not self.value >= 0.0:
            raise ValueError(f"Hausdorff measure must be nonnegative, got {self.value}")

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """Closed simplicial complex embedded in R^d, d ∈ {2, 3}.

    Attributes:
        vertices: (n, d) coordinates, shared with parent/child complexes
        simplices: simplices[k] is an (m_k, k+1) array of vertex ids
        boundary_facets: ids of (d-1)-simplices marked as lying on ∂B
        parent_index: for subcomplexes, simplices[k][i] is parent simplices[k][parent_index[k][i]]
    """

    vertices: np.ndarray
    simplices: tuple[np.ndarray, ...]
    boundary_facets: frozenset[int] = field(default_factory=frozenset)
    parent_index: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=float)
        vertices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        frozen = []
        for k, arr in enumerate(self.simplices):
            arr = np.array(arr, dtype=np.int64).reshape(-1, k + 1)
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "simplices", tuple(frozen))
        if vertices.ndim != 2 or vertices.shape[1] not in (2, 3):
            raise DimensionError(
                "Ambient dimension must be 2 or 3",
                details={"shape": list(vertices.shape)},
            )

    # ------------------------------------------------------------------ shape
    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def dim(self) -> int:
        """Top simplex dimension (-1 for the empty complex)."""
        for k in range(len(self.simplices) - 1, -1, -1):
            if len(self.simplices[k]):
                return k
        return -1

    def count(self, k: int) -> int:
        return len(self.simplices[k]) if k < len(self.simplices) else 0

    def simplex(self, simplex_id: SimplexId) -> np.ndarray:
        k, idx = simplex_id
        if k < 0 or k >= len(self.simplices) or idx < 0 or idx >= len(self.simplices[k]):
            raise IdError(
                "Unknown simplex id",
                details={"dimension": k, "index": idx, "available": self.count(k) if k >= 0 else 0},
            )
        return self.simplices[k][idx]

    @property
    def is_empty(self) -> bool:
        return self.dim < 0

    @property
    def is_pure(self) -> bool:
        """Every simplex is a face of some top-dimensional simplex."""
        top = self.dim
        if top <= 0:
            return True
        covered = self._faces_of(self.simplices[top])
        for k in range(top):
            for row in self.simplices[k]:
                if tuple(sorted(row)) not in covered[k]:
                    return False
        return True

    @staticmethod
    def _faces_of(top: np.ndarray) -> dict[int, set[tuple[int, ...]]]:
        faces: dict[int, set[tuple[int, ...]]] = {}
        for row in top:
            for k in range(len(row) - 1):
                faces.setdefault(k, set()).update(
                    tuple(sorted(f)) for f in combinations(row.tolist(), k + 1)
                )
        return faces

    # ------------------------------------------------------------- adjacency
    @cached_property
    def edge_lookup(self) -> dict[tuple[int, int], int]:
        """Canonical (min, max) vertex pair -> edge id."""
        if self.count(1) == 0:
            return {}
        return {
            (min(a, b), max(a, b)): i
            for i, (a, b) in enumerate(self.simplices[1].tolist())
        }

    @cached_property
    def facet_lookup(self) -> dict[tuple[int, ...], int]:
        k = self.ambient_dim - 1
        if self.count(k) == 0:
            return {}
        return {tuple(sorted(row)): i for i, row in enumerate(self.simplices[k].tolist())}

    @cached_property
    def vertex_star(self) -> dict[int, dict[int, list[int]]]:
        """k -> {vertex id -> ids of k-simplices containing it}."""
        star: dict[int, dict[int, list[int]]] = {}
        for k in range(1, len(self.simplices)):
            per_vertex: dict[int, list[int]] = {}
            for i, row in enumerate(self.simplices[k].tolist()):
                for v in row:
                    per_vertex.setdefault(v, []).append(i)
            star[k] = per_vertex
        return star

    @cached_property
    def facet_cofaces(self) -> dict[int, list[int]]:
        """(d-1)-simplex id -> ids of d-simplices containing it."""
        d = self.ambient_dim
        cofaces: dict[int, list[int]] = {i: [] for i in range(self.count(d - 1))}
        if self.count(d) == 0:
            return cofaces
        lookup = self.facet_lookup
        for t, row in enumerate(self.simplices[d].tolist()):
            for face in combinations(sorted(row), d):
                cofaces[lookup[face]].append(t)
        return cofaces

    @cached_property
    def computed_boundary_facets(self) -> frozenset[int]:
        """Facets with exactly one incident top simplex (or the stored marks)."""
        if self.boundary_facets:
            return self.boundary_facets
        return frozenset(i for i, tops in self.facet_cofaces.items() if len(tops) == 1)

    @cached_property
    def boundary_vertex_ids(self) -> frozenset[int]:
        k = self.ambient_dim - 1
        if self.count(k) == 0:
            return frozenset()
        rows = self.simplices[k][sorted(self.computed_boundary_facets)]
        return frozenset(int(v) for v in np.unique(rows))

    @cached_property
    def interior_edge_ids(self) -> tuple[int, ...]:
        """Edges of a 2-d body that are not on ∂B."""
        if self.ambient_dim != 2:
            return tuple(range(self.count(1)))
        marked = self.computed_boundary_facets
        return tuple(i for i in range(self.count(1)) if i not in marked)

    @cached_property
    def max_edge_length(self) -> float:
        if self.count(1) == 0:
            return 0.0
        e = self.simplices[1]
        return float(np.max(np.linalg.norm(self.vertices[e[:, 1]] - self.vertices[e[:, 0]], axis=1)))

    # -------------------------------------------------------------- measures
    def edge_vectors(self, k: int) -> np.ndarray:
        """(m_k, d, k) matrices whose columns are the edges leaving vertex 0."""
        rows = self.simplices[k]
        pts = self.vertices[rows]
        return np.swapaxes(pts[:, 1:, :] - pts[:, :1, :], 1, 2)

    def measures(self, k: int) -> np.ndarray:
        """Hausdorff measures of all k-simplices."""
        if k == 0:
            return np.ones(self.count(0))
        return _measures(self.edge_vectors(k))

    def projections(self, k: int) -> np.ndarray:
        """Tangent projections of all k-simplices, shape (m_k, d, d)."""
        if self.count(k) == 0:
            return np.zeros((0, self.ambient_dim, self.ambient_dim))
        return span_projections(self.edge_vectors(k))

    def barycenters(self, k: int) -> np.ndarray:
        return self.vertices[self.simplices[k]].mean(axis=1)

    def validate_nondegenerate(self) -> None:
        for k in range(1, len(self.simplices)):
            if self.count(k) == 0:
                continue
            m = self.measures(k)
            bad = np.flatnonzero(m <= MEASURE_TOL)
            if bad.size:
                i = int(bad[0])
                raise DegenerateSimplexError(
                    "Simplex has vanishing Hausdorff measure",
                    details={
                        "dimension": k,
                        "index": i,
                        "vertices": self.simplices[k][i].tolist(),
                        "measure": float(m[i]),
                    },
                )

    # ---------------------------------------------------------- constructors
    @classmethod
    def from_simplices(
        cls,
        vertices: np.ndarray,
        given: dict[int, Sequence[Sequence[int]]],
        boundary_facets: Iterable[Sequence[int]] | None = None,
    ) -> "SimplicialComplex":
        """Build the closure of the given simplices.

        Top-dimensional simplices of a full-dimensional body are reoriented to
        positive volume; generated faces are stored in increasing vertex order.
        Explicitly given simplices keep their vertex order.

        Args:
            vertices: (n, d) coordinates
            given: k -> list of k-simplices (vertex id tuples)
            boundary_facets: optional (d-1)-simplices marked as ∂B

        Raises:
            DegenerateSimplexError: if any simplex has measure <= 1e-14
        """
        vertices = np.asarray(vertices, dtype=float)
        d = vertices.shape[1]
        top = max((k for k, rows in given.items() if len(rows)), default=-1)
        store: list[dict[tuple[int, ...], tuple[int, ...]]] = [dict() for _ in range(max(top, 0) + 1)]

        for k in sorted(given, reverse=True):
            for row in given[k]:
                row = tuple(int(v) for v in row)
                if len(row) != k + 1:
                    raise DimensionError(
                        "Simplex has wrong number of vertices",
                        details={"dimension": k, "simplex": list(row)},
                    )
                if k == d:
                    row = _positively_oriented(vertices, row)
                store[k].setdefault(tuple(sorted(row)), row)
                for j in range(k):
                    for face in combinations(sorted(row), j + 1):
                        store[j].setdefault(face, face)

        # vertices by id, higher simplices in first-seen order
        simplices = tuple(
            np.array(sorted(level.values()) if k == 0 else list(level.values()), dtype=np.int64).reshape(-1, k + 1)
            for k, level in enumerate(store)
        ) if top >= 0 else ()

        marks: frozenset[int] = frozenset()
        complex_ = cls(vertices=vertices, simplices=simplices)
        if boundary_facets is not None:
            lookup = complex_.facet_lookup
            ids = []
            for facet in boundary_facets:
                key = tuple(sorted(int(v) for v in facet))
                if key not in lookup:
                    raise IdError("Boundary facet is not a face of the mesh", details={"facet": list(key)})
                ids.append(lookup[key])
            marks = frozenset(ids)
            complex_ = cls(vertices=vertices, simplices=simplices, boundary_facets=marks)
        complex_.validate_nondegenerate()
        return complex_

    @classmethod
    def empty(cls, vertices: np.ndarray) -> "SimplicialComplex":
        return cls(vertices=vertices, simplices=())


def _measures(edge_vectors: np.ndarray) -> np.ndarray:
    k = edge_vectors.shape[2]
    gram = np.einsum("mdi,mdj->mij", edge_vectors, edge_vectors)
    return np.sqrt(np.clip(np.linalg.det(gram), 0.0, None)) / factorial(k)


def _positively_oriented(vertices: np.ndarray, row: tuple[int, ...]) -> tuple[int, ...]:
    pts = vertices[list(row)]
    jac = (pts[1:] - pts[0]).T
    if np.linalg.det(jac) < 0:
        return (row[1], row[0]) + row[2:]
    return row


def _simplex_edges(complex_: SimplicialComplex, simplex: Sequence[int]) -> np.ndarray:
    simplex = [int(v) for v in simplex]
    n = len(complex_.vertices)
    if any(v < 0 or v >= n for v in simplex):
        raise IdError("Simplex references unknown vertex", details={"simplex": simplex, "vertex_count": n})
    pts = complex_.vertices[simplex]
    return (pts[1:] - pts[0]).T


def simplex_measure(simplex: Sequence[int], complex_: SimplicialComplex) -> HausdorffMeasureValue:
    """k-dimensional Hausdorff measure of a simplex given by vertex ids."""
    edges = _simplex_edges(complex_, simplex)
    if edges.shape[1] == 0:
        return HausdorffMeasureValue(1.0)
    value = float(_measures(edges[None, :, :])[0])
    if value <= MEASURE_TOL:
        raise DegenerateSimplexError(
            "Simplex has vanishing Hausdorff measure",
            details={"vertices": list(simplex), "measure": value},
        )
    return HausdorffMeasureValue(value)


def tangent_plane(simplex: Sequence[int], complex_: SimplicialComplex) -> GrassmannPoint:
    """Projection onto the direction space of the simplex's affine span."""
    edges = _simplex_edges(complex_, simplex)
    k = edges.shape[1]
    if not 1 <= k <= complex_.ambient_dim - 1:
        raise DimensionError(
            "Tangent planes are defined for 1 <= k <= d-1",
            details={"k": k, "d": complex_.ambient_dim},
        )
    simplex_measure(simplex, complex_)
    proj = span_projections(edges[None, :, :])[0]
    return GrassmannPoint(proj=proj, k=k)


def subcomplex(complex_: SimplicialComplex, ids: Iterable[SimplexId]) -> SimplicialComplex:
    """Closed subcomplex generated by the given simplex ids.

    The result shares the parent's vertex array; parent_index maps every stored
    simplex back to its id in the parent.
    """
    chosen: dict[int, set[int]] = {}
    for k, idx in ids:
        complex_.simplex((k, idx))
        chosen.setdefault(k, set()).add(idx)
    if not chosen:
        return SimplicialComplex.empty(complex_.vertices)

    top = max(chosen)
    keep: list[set[int]] = [set() for _ in range(top + 1)]
    for k, idxs in chosen.items():
        keep[k].update(idxs)
    lookups: dict[int, dict[tuple[int, ...], int]] = {}
    for k in range(top, 0, -1):
        for idx in keep[k]:
            row = complex_.simplices[k][idx].tolist()
            for j in range(k):
                if j not in lookups:
                    lookups[j] = {
                        tuple(sorted(r)): i for i, r in enumerate(complex_.simplices[j].tolist())
                    }
                for face in combinations(sorted(row), j + 1):
                    keep[j].add(lookups[j][face])

    simplices = []
    parent_index = []
    for k in range(top + 1):
        order = np.array(sorted(keep[k]), dtype=np.int64)
        parent_index.append(order)
        simplices.append(complex_.simplices[k][order] if order.size else np.zeros((0, k + 1), dtype=np.int64))
    return SimplicialComplex(
        vertices=complex_.vertices,
        simplices=tuple(simplices),
        parent_index=tuple(parent_index),
    )


def edge_subcomplex(complex_: SimplicialComplex, edge_ids: Iterable[int]) -> SimplicialComplex:
    return subcomplex(complex_, ((1, int(e)) for e in edge_ids))


def boundary_vertices(support: SimplicialComplex) -> dict[int, np.ndarray]:
    """Odd-incidence vertices of a 1-complex with their inward unit tangents.

    The tangent points from the vertex into its incident edge(s).
    """
    if support.dim > 1:
        raise DimensionError("boundary_vertices expects a 1-complex", details={"dim": support.dim})
    if support.count(1) == 0:
        return {}
    result: dict[int, np.ndarray] = {}
    star = support.vertex_star[1]
    for v in sorted(star):
        incident = star[v]
        if len(incident) % 2 == 0:
            continue
        origin = support.vertices[v]
        directions = []
        for e in incident:
            a, b = support.simplices[1][e]
            other = b if a == v else a
            vec = support.vertices[other] - origin
            directions.append(vec / np.linalg.norm(vec))
        tangent = np.sum(directions, axis=0)
        norm = np.linalg.norm(tangent)
        tangent = directions[0] if norm < 1e-12 else tangent / norm
        result[v] = tangent
    return result
