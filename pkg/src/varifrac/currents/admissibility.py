"""Extended weak diffeomorphism report, items (i)-(v).

Item (v) compares a lower bound of π_#|∂G_u| on balls (a finite sup of
boundary pairings over unit-comass localized forms) against
Σ_k μ_{V_k} + π_#|∂V_1| on the enlarged ball, so it is a necessary-condition
check: a failure proves the map inadmissible, a pass does not prove the converse.
"""

import numpy as np
import structlog
from pydantic import BaseModel, Field
from scipy.spatial import cKDTree

from varifrac.core.exceptions import MeshError
from varifrac.currents.deformation import DeformationField
from varifrac.currents.forms import BumpForm, FormFamily, XBump, YBump, multi_indices
from varifrac.currents.graph_current import boundary_current_eval, lq_norm_of_minors
from varifrac.currents.injectivity import Probe, ciarlet_necas_check
from varifrac.geometry.complex import SimplicialComplex
from varifrac.varifold.measures import ball_measure
from varifrac.varifold.model import StratifiedFamily

logger = structlog.get_logger(__name__)

DEFAULT_TOL = 1e-8
VERTEX_MATCH_TOL = 1e-9


def _greedy_cover(points: np.ndarray, spacing: float) -> np.ndarray:
    chosen: list[int] = []
    for i, p in enumerate(points):
        if all(np.linalg.norm(points[j] - p) > spacing for j in chosen):
            chosen.append(i)
    return points[chosen] if chosen else np.zeros((0, points.shape[1]))


def form_family(mesh: SimplicialComplex, K: float, resolution: float) -> FormFamily:
    """Unit-comass (d-1)-forms centered on a greedy cover of interior vertices.

    Every center carries one form per coordinate multi-index, with ψ_x of
    radius `resolution` and ψ_y scaled by K + 1.
    """
    d = mesh.ambient_dim
    boundary = mesh.boundary_vertex_ids
    interior = np.array([v for i, v in enumerate(mesh.vertices) if i not in boundary]).reshape(-1, d)
    centers = _greedy_cover(interior, resolution)
    ybump = YBump(scale=K + 1.0)
    family = FormFamily(centers=centers, radius=resolution)
    for c_idx, center in enumerate(centers):
        xbump = XBump.on_mesh(mesh, center, resolution)
        if xbump.is_null:
            continue
        family.forms[c_idx] = [BumpForm(xbump, ybump, {J: 1.0}, degree=d - 1) for J in multi_indices(d, d - 1)]
    logger.debug("form family built", centers=len(centers), forms=len(family), radius=resolution)
    return family


class ItemReport(BaseModel):
    passed: bool
    structural: bool = False
    margin: float | None = None
    detail: dict = Field(default_factory=dict)


class AdmissibilityReport(BaseModel):
    """Items (i)-(v) of the extended weak diffeomorphism definition."""

    items: dict[str, ItemReport]
    resolution: float
    K: float

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items.values())

    def failed_items(self) -> list[str]:
        return [name for name, item in self.items.items() if not item.passed]


def check_shared_mesh(u: DeformationField, family: StratifiedFamily) -> None:
    """Raise MeshError unless every varifold support vertex is a mesh node."""
    if family.d != u.dim:
        raise MeshError("Deformation and varifold family live in different dimensions", details={"u": u.dim, "family": family.d})
    tree = cKDTree(u.mesh.reference.vertices)
    scale = max(1.0, float(np.max(np.abs(u.mesh.reference.vertices))))
    for k in family.nonempty():
        V = family.varifolds[k]
        if V.ambient_dim != u.dim:
            raise MeshError("Varifold ambient dimension differs from the mesh", details={"k": k})
        if V.support is None:
            continue
        used = np.unique(V.support.simplices[k])
        dist, _ = tree.query(V.support.vertices[used])
        if np.max(dist) > VERTEX_MATCH_TOL * scale:
            bad = int(used[int(np.argmax(dist))])
            raise MeshError(
                "Varifold support vertex is not a mesh node",
                details={"k": k, "vertex": bad, "position": V.support.vertices[bad].tolist(), "distance": float(np.max(dist))},
            )


def _rhs_measure(family: StratifiedFamily, center: np.ndarray, radius: float) -> float:
    total = 0.0
    for k in family.nonempty():
        total += ball_measure(family.varifolds[k], center, radius)
    dV1 = family.boundary.get(1)
    if dV1 is not None and len(dV1):
        inside = np.sum((dV1.x - center) ** 2, axis=1) <= radius * radius
        total += float(np.sum(dV1.magnitudes[inside]))
    return total


def boundary_domination(
    u: DeformationField,
    family: StratifiedFamily,
    forms: FormFamily,
    resolution: float,
    tol: float = DEFAULT_TOL,
) -> ItemReport:
    """Item (v): per center, sup |∂G_u(ω)| vs Σ μ_{V_k} + |∂V_1| on the enlarged ball."""
    h_max = u.mesh.reference.max_edge_length
    enlarged = forms.radius + h_max + resolution
    worst_margin = float("inf")
    worst_center = None
    max_boundary = 0.0
    for c_idx, group in sorted(forms.forms.items()):
        center = forms.centers[c_idx]
        lhs = max(abs(boundary_current_eval(u, omega)) for omega in group)
        max_boundary = max(max_boundary, lhs)
        rhs = _rhs_measure(family, center, enlarged)
        margin = rhs - lhs
        if margin < worst_margin:
            worst_margin, worst_center = margin, center
    if worst_center is None:
        return ItemReport(passed=True, margin=0.0, detail={"centers": 0})
    return ItemReport(
        passed=worst_margin >= -tol,
        margin=worst_margin,
        detail={
            "centers": len(forms.forms),
            "forms": len(forms),
            "worst_center": worst_center.tolist(),
            "max_boundary_pairing": max_boundary,
            "ball_radius": enlarged,
        },
    )


def admissibility_report(
    u: DeformationField,
    family: StratifiedFamily,
    K: float,
    resolution: float | None = None,
    tol: float = DEFAULT_TOL,
    probes: list[Probe] | None = None,
    q: float | None = None,
) -> AdmissibilityReport:
    """Check items (i)-(v) for u against the stratified family.

    Args:
        u: deformation on the crack-duplicated mesh
        family: crack varifolds with curvature and boundary data
        K: sup-norm bound of the admissible class
        resolution: ball radius r (default 2 × max mesh edge)
        tol: absolute tolerance for (iii)-(v)
        probes: Ciarlet–Nečas probes (default probe_family(u))
        q: exponent for the ‖M(Du)‖_{L^q} diagnostic under item (ii)

    Raises:
        MeshError: u and family do not share the mesh
    """
    check_shared_mesh(u, family)
    r = resolution if resolution is not None else 2.0 * u.mesh.reference.max_edge_length

    sup = u.sup_norm
    items: dict[str, ItemReport] = {
        "i": ItemReport(
            passed=sup <= K + tol,
            structural=True,
            margin=K - sup,
            detail={"piecewise_affine": True, "sup_norm": sup},
        ),
    }
    detail_ii: dict = {"minors_integrable": True}
    if q is not None:
        detail_ii["lq_norm_of_minors"] = lq_norm_of_minors(u, q)
        detail_ii["q"] = q
    items["ii"] = ItemReport(passed=True, structural=True, detail=detail_ii)

    dets = u.determinants
    min_det = float(np.min(dets)) if len(dets) else 1.0
    items["iii"] = ItemReport(
        passed=min_det > 0.0,
        margin=min_det,
        detail={"nonpositive_elements": int(np.sum(dets <= 0.0))},
    )

    cn = ciarlet_necas_check(u, probes=probes, tol=tol)
    items["iv"] = ItemReport(passed=cn.passed, margin=cn.margin, detail={"probes": [p.model_dump() for p in cn.probes]})

    forms = form_family(u.mesh.reference, K, r)
    items["v"] = boundary_domination(u, family, forms, r, tol)

    report = AdmissibilityReport(items=items, resolution=r, K=K)
    logger.info("admissibility checked", passed=report.passed, failed=report.failed_items(), resolution=r)
    return report
