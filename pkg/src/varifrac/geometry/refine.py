"""One uniform halving step for curves and triangulated surfaces."""

import numpy as np
import structlog

from varifrac.core.exceptions import DimensionError
from varifrac.geometry.complex import SimplicialComplex

logger = structlog.get_logger(__name__)

COLLINEAR_TOL = 1e-12


def refine(complex_: SimplicialComplex) -> SimplicialComplex:
    """Halve every edge of a pure 1- or 2-complex.

    Curve edges get their new vertex on the circle through the edge and a
    neighboring vertex, which keeps sampled circles exact. Triangles are split
    1 -> 4 at straight edge midpoints.
    """
    if complex_.dim == 1:
        return _refine_curve(complex_)
    if complex_.dim == 2:
        return _refine_surface(complex_)
    raise DimensionError("refine expects a 1- or 2-complex", details={"dim": complex_.dim})


def _arc_midpoint(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    straight = 0.5 * (a + b)
    u, v = a - p, b - p
    uu, vv, uv = u @ u, v @ v, u @ v
    denom = 2.0 * (uu * vv - uv * uv)
    if denom <= COLLINEAR_TOL * max(uu * vv, 1e-300):
        return straight
    # circumcenter of (p, a, b) in their common plane
    s = vv * (uu - uv) / denom
    t = uu * (vv - uv) / denom
    center = p + s * u + t * v
    radius = np.linalg.norm(a - center)
    direction = straight - center
    norm = np.linalg.norm(direction)
    if norm < COLLINEAR_TOL:
        return straight
    return center + radius * direction / norm


def _refine_curve(curve: SimplicialComplex) -> SimplicialComplex:
    verts = [v for v in curve.vertices]
    star = curve.vertex_star[1]
    edges = curve.simplices[1]
    new_edges = []
    for e, (a, b) in enumerate(edges.tolist()):
        neighbor = None
        for end, other_end in ((a, b), (b, a)):
            for f in star.get(end, []):
                if f == e:
                    continue
                fa, fb = edges[f]
                neighbor = fb if fa == end else fa
                break
            if neighbor is not None:
                break
        pa, pb = curve.vertices[a], curve.vertices[b]
        if neighbor is None or neighbor in (a, b):
            mid = 0.5 * (pa + pb)
        else:
            mid = _arc_midpoint(curve.vertices[neighbor], pa, pb)
        verts.append(mid)
        m = len(verts) - 1
        new_edges += [(a, m), (m, b)]
    vertices = np.array(verts)
    keep = sorted({int(v) for v in edges.ravel()}) + list(range(len(curve.vertices), len(vertices)))
    logger.debug("curve refined", edges_before=len(edges), edges_after=len(new_edges))
    return SimplicialComplex.from_simplices(vertices, {0: [(i,) for i in keep], 1: new_edges})


def _refine_surface(surface: SimplicialComplex) -> SimplicialComplex:
    verts = [v for v in surface.vertices]
    lookup: dict[tuple[int, int], int] = {}

    def mid(a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        if key not in lookup:
            verts.append(0.5 * (surface.vertices[a] + surface.vertices[b]))
            lookup[key] = len(verts) - 1
        return lookup[key]

    faces = []
    for a, b, c in surface.simplices[2].tolist():
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        faces += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    vertices = np.array(verts)
    logger.debug("surface refined", triangles_before=surface.count(2), triangles_after=len(faces))
    return SimplicialComplex.from_simplices(vertices, {0: [(i,) for i in range(len(vertices))], 2: faces})
