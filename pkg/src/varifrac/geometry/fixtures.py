"""Analytic fixture builders.

Structured meshes and sampled curves/surfaces with known measures and
curvatures. These are not a general mesher; real meshes are inputs.
"""

import numpy as np

from varifrac.core.exceptions import DomainValidationError
from varifrac.geometry.complex import SimplicialComplex


def rectangle_mesh(
    nx: int,
    ny: int,
    width: float = 1.0,
    height: float = 1.0,
    origin: tuple[float, float] = (0.0, 0.0),
) -> SimplicialComplex:
    """Structured triangulation of [x0, x0+width] × [y0, y0+height].

    Vertex (i, j) has id j*(nx+1) + i. Every cell is split along its
    lower-left to upper-right diagonal. All outer edges are marked as ∂B.
    """
    if nx < 1 or ny < 1:
        raise DomainValidationError("Rectangle mesh needs at least one cell per direction", details={"nx": nx, "ny": ny})
    xs = origin[0] + width * np.arange(nx + 1) / nx
    ys = origin[1] + height * np.arange(ny + 1) / ny
    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i: int, j: int) -> int:
        return j * (nx + 1) + i

    triangles = []
    for j in range(ny):
        for i in range(nx):
            v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
            triangles.append((v00, v10, v11))
            triangles.append((v00, v11, v01))

    boundary = []
    for i in range(nx):
        boundary.append((vid(i, 0), vid(i + 1, 0)))
        boundary.append((vid(i, ny), vid(i + 1, ny)))
    for j in range(ny):
        boundary.append((vid(0, j), vid(0, j + 1)))
        boundary.append((vid(nx, j), vid(nx, j + 1)))

    return SimplicialComplex.from_simplices(
        vertices,
        {0: [(i,) for i in range(len(vertices))], 2: triangles},
        boundary_facets=boundary,
    )


def polyline(points: np.ndarray, closed: bool = False) -> SimplicialComplex:
    """1-complex through the given points in order."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    edges = [(i, i + 1) for i in range(n - 1)]
    if closed:
        edges.append((n - 1, 0))
    return SimplicialComplex.from_simplices(points, {0: [(i,) for i in range(n)], 1: edges})


def polygon_circle(n: int, radius: float = 1.0, center: tuple[float, ...] = (0.0, 0.0)) -> SimplicialComplex:
    """Closed inscribed n-gon of a circle, counter-clockwise."""
    t = 2.0 * np.pi * np.arange(n) / n
    pts = np.column_stack([radius * np.cos(t), radius * np.sin(t)]) + np.asarray(center[:2])
    if len(center) == 3:
        pts = np.column_stack([pts, np.full(n, center[2])])
    return polyline(pts, closed=True)


def circular_arc(n: int, radius: float = 1.0, angle: float = np.pi) -> SimplicialComplex:
    """Open inscribed polyline of n segments on the arc t ∈ [0, angle]."""
    t = angle * np.arange(n + 1) / n
    pts = np.column_stack([radius * np.cos(t), radius * np.sin(t)])
    return polyline(pts)


def icosphere(level: int, radius: float = 1.0) -> SimplicialComplex:
    """Triangulated sphere from an icosahedron refined `level` times."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    pts = [np.asarray(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        midpoint: dict[tuple[int, int], int] = {}

        def mid(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in midpoint:
                m = pts[a] + pts[b]
                pts.append(m / np.linalg.norm(m))
                midpoint[key] = len(pts) - 1
            return midpoint[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            refined += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = refined
    vertices = radius * np.array(pts)
    return SimplicialComplex.from_simplices(vertices, {0: [(i,) for i in range(len(vertices))], 2: faces})


def flat_disk(n_rim: int = 64, rings: int = 8, radius: float = 1.0) -> tuple[SimplicialComplex, SimplicialComplex]:
    """Planar disk in the z=0 plane of R^3 and its rim curve.

    Returns (disk, rim). Both complexes share the same vertex array; rim
    vertices are the last n_rim ids.
    """
    pts = [np.zeros(3)]
    t = 2.0 * np.pi * np.arange(n_rim) / n_rim
    for j in range(1, rings + 1):
        r = radius * j / rings
        pts.extend(np.column_stack([r * np.cos(t), r * np.sin(t), np.zeros(n_rim)]))
    vertices = np.array(pts)

    def vid(j: int, a: int) -> int:
        return 1 + (j - 1) * n_rim + (a % n_rim)

    faces = [(0, vid(1, a), vid(1, a + 1)) for a in range(n_rim)]
    for j in range(1, rings):
        for a in range(n_rim):
            faces.append((vid(j, a), vid(j + 1, a), vid(j + 1, a + 1)))
            faces.append((vid(j, a), vid(j + 1, a + 1), vid(j, a + 1)))
    disk = SimplicialComplex.from_simplices(vertices, {0: [(i,) for i in range(len(vertices))], 2: faces})
    rim_edges = [(vid(rings, a), vid(rings, a + 1)) for a in range(n_rim)]
    rim = SimplicialComplex.from_simplices(vertices, {1: rim_edges})
    return disk, rim
