"""Generalized curvature A, boundary measure ∂V and the weak identity.

The identity checked here is

    Σ_atoms w (Π_ij D_j φ + A_ilj D_{Π_lj} φ + H_i φ) = -Σ_{∂V} φ b_i,   H_i = A_jij,

with A[i, l, j] = Π_ir D_r Π_lj. A is fitted per simplex as the least-squares
tangential derivative of the Π field across simplices sharing a vertex.
"""

from math import fsum

import numpy as np
import structlog

from varifrac.core.exceptions import DimensionError, MeshError
from varifrac.geometry.complex import SimplicialComplex
from varifrac.geometry.quadrature import simplex_rule
from varifrac.varifold.model import BoundaryMeasure, CurvatureField, DiscreteVarifold
from varifrac.varifold.test_functions import TestFunction

logger = structlog.get_logger(__name__)

FIT_RCOND = 1e-10


def _per_simplex_theta(V: DiscreteVarifold, m: int) -> np.ndarray:
    theta = np.ones(m, dtype=np.int64)
    if V.simplex_index is not None and len(V):
        theta[V.simplex_index] = V.theta
    return theta


def _simplex_neighbors(support: SimplicialComplex, k: int) -> list[list[int]]:
    star = support.vertex_star[k]
    neighbors = []
    for e, row in enumerate(support.simplices[k].tolist()):
        adjacent = sorted({f for v in row for f in star.get(v, []) if f != e})
        neighbors.append(adjacent)
    return neighbors


def simplex_curvature(support: SimplicialComplex, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per k-simplex A tensors (m, d, d, d) and isolation flags (m,)."""
    d = support.ambient_dim
    m = support.count(k)
    P = support.projections(k)
    centers = support.barycenters(k)
    tensors = np.zeros((m, d, d, d))
    isolated = np.zeros(m, dtype=bool)
    for e, adjacent in enumerate(_simplex_neighbors(support, k)):
        if not adjacent:
            isolated[e] = True
            continue
        offsets = (centers[adjacent] - centers[e]) @ P[e]          # Π_e symmetric
        jumps = (P[adjacent] - P[e]).reshape(len(adjacent), d * d)
        G, *_ = np.linalg.lstsq(offsets, jumps, rcond=FIT_RCOND)
        tensors[e] = np.einsum("ir,rlj->ilj", P[e], G.reshape(d, d, d))
    return tensors, isolated


def _on_body_boundary(support: SimplicialComplex, body: SimplicialComplex | None, vertex_ids) -> bool:
    if body is None:
        return False
    return all(int(v) in body.boundary_vertex_ids for v in vertex_ids)


def _check_shared_vertices(support: SimplicialComplex, body: SimplicialComplex | None) -> None:
    if body is None:
        return
    if support.vertices is body.vertices:
        return
    if support.vertices.shape != body.vertices.shape or not np.allclose(support.vertices, body.vertices):
        raise MeshError(
            "Varifold support and body do not share vertices",
            details={"support_vertices": len(support.vertices), "body_vertices": len(body.vertices)},
        )


def _curve_boundary(V: DiscreteVarifold, support: SimplicialComplex, body) -> BoundaryMeasure:
    d = support.ambient_dim
    edges = support.simplices[1]
    theta = _per_simplex_theta(V, len(edges))
    P = support.projections(1)
    xs, projs, bs = [], [], []
    for v, incident in sorted(support.vertex_star[1].items()):
        if len(incident) % 2 == 0 or _on_body_boundary(support, body, [v]):
            continue
        b = np.zeros(d)
        for e in incident:
            a, c = edges[e]
            other = c if a == v else a
            tau = support.vertices[other] - support.vertices[v]
            b += theta[e] * tau / np.linalg.norm(tau)
        xs.append(support.vertices[v])
        projs.append(P[incident[0]])
        bs.append(b)
    if not xs:
        return BoundaryMeasure.empty(d)
    return BoundaryMeasure(x=np.array(xs), proj=np.array(projs), b=np.array(bs))


def _surface_boundary(V: DiscreteVarifold, support: SimplicialComplex, body) -> BoundaryMeasure:
    d = support.ambient_dim
    tris = support.simplices[2]
    theta = _per_simplex_theta(V, len(tris))
    P = support.projections(2)
    edge_tris: dict[tuple[int, int], list[int]] = {}
    for t, row in enumerate(tris.tolist()):
        for a, b in ((row[0], row[1]), (row[1], row[2]), (row[2], row[0])):
            edge_tris.setdefault((min(a, b), max(a, b)), []).append(t)

    bary, qw = simplex_rule(1, V.quadrature_order)
    xs, projs, bs = [], [], []
    for (a, b), incident in sorted(edge_tris.items()):
        if len(incident) % 2 == 0 or _on_body_boundary(support, body, [a, b]):
            continue
        t = incident[0]
        pa, pb = support.vertices[a], support.vertices[b]
        edge = pb - pa
        length = float(np.linalg.norm(edge))
        tangent = edge / length
        inward = P[t] @ (support.vertices[tris[t]].mean(axis=0) - 0.5 * (pa + pb))
        inward -= (inward @ tangent) * tangent
        conormal = inward / np.linalg.norm(inward)
        for q in range(len(qw)):
            xs.append(bary[q, 0] * pa + bary[q, 1] * pb)
            projs.append(P[t])
            bs.append(theta[t] * length * qw[q] * conormal)
    if not xs:
        return BoundaryMeasure.empty(d)
    return BoundaryMeasure(x=np.array(xs), proj=np.array(projs), b=np.array(bs))


def estimate_curvature(
    V: DiscreteVarifold,
    support: SimplicialComplex | None = None,
    body: SimplicialComplex | None = None,
) -> tuple[CurvatureField, BoundaryMeasure]:
    """Fit A from the support's Π field and build ∂V.

    ∂V lives on odd-incidence vertices (k=1) or boundary edges (k=2) with
    b = θ × inward unit tangent/conormal × local measure. When `body` is given,
    boundary atoms lying on ∂B are dropped.

    Raises:
        MeshError: V has no support complex, or support and body disagree
        DimensionError: k outside {1, 2}
    """
    support = support if support is not None else V.support
    d = V.ambient_dim
    if V.is_empty:
        return CurvatureField.zeros(0, d), BoundaryMeasure.empty(d)
    if support is None or V.simplex_index is None:
        raise MeshError("Curvature estimation needs the varifold's support complex", details={"k": V.k})
    if V.k not in (1, 2):
        raise DimensionError("Curvature is estimated for k in {1, 2}", details={"k": V.k})
    _check_shared_vertices(support, body)

    tensors, isolated = simplex_curvature(support, V.k)
    if np.any(isolated):
        logger.warning(
            "isolated simplices get zero curvature",
            k=V.k,
            count=int(isolated.sum()),
            simplices=np.flatnonzero(isolated)[:10].tolist(),
        )
    field = CurvatureField(tensor=tensors[V.simplex_index], isolated=isolated[V.simplex_index])
    boundary = _curve_boundary(V, support, body) if V.k == 1 else _surface_boundary(V, support, body)
    logger.debug(
        "curvature estimated",
        k=V.k,
        atoms=len(V),
        max_norm=float(field.norms.max()) if len(field) else 0.0,
        boundary_atoms=len(boundary),
        boundary_variation=boundary.total_variation,
    )
    return field, boundary


def curvature_energy_density(A: CurvatureField, p: float) -> np.ndarray:
    """Per-atom ‖A‖^p."""
    return A.norms**p


def weak_identity_residuals(
    V: DiscreteVarifold,
    A: CurvatureField,
    dV: BoundaryMeasure,
    test_family: list[TestFunction],
) -> list[tuple[str, float]]:
    """Normalized residual of the weak identity for every test function."""
    if len(A) != len(V):
        raise MeshError("Curvature field does not match the varifold atoms", details={"atoms": len(V), "curvature": len(A)})
    d = V.ambient_dim
    H = A.mean_curvature
    out = []
    for phi in test_family:
        val = phi.value(V.x, V.proj) if len(V) else np.zeros(0)
        gx = phi.grad_x(V.x, V.proj) if len(V) else np.zeros((0, d))
        gp = phi.grad_pi(V.x, V.proj) if len(V) else np.zeros((0, d, d))
        bval = phi.value(dV.x, dV.proj) if len(dV) else np.zeros(0)

        per_atom = (
            np.einsum("nij,nj->ni", V.proj, gx)
            + np.einsum("nilj,nlj->ni", A.tensor, gp)
            + H * val[:, None]
        )
        norm = 1.0 + max(phi.c1_norm(V.x, V.proj), phi.c1_norm(dV.x, dV.proj))
        worst = 0.0
        for i in range(d):
            terms = (V.weight * per_atom[:, i]).tolist() + (bval * dV.b[:, i]).tolist()
            worst = max(worst, abs(fsum(terms)))
        out.append((phi.name, worst / norm))
    return out


def weak_identity_residual(
    V: DiscreteVarifold,
    A: CurvatureField,
    dV: BoundaryMeasure,
    test_family: list[TestFunction],
) -> float:
    """max over φ and i of |LHS_i + ∫φ d∂V^i| / (1 + ‖φ‖_C1)."""
    residuals = weak_identity_residuals(V, A, dV, test_family)
    return max((r for _, r in residuals), default=0.0)
