import numpy as np
import pytest

from varifrac.core.exceptions import DegenerateSimplexError, DimensionError, IdError, MeshParseError
from varifrac.geometry.complex import (
    SimplicialComplex,
    boundary_vertices,
    edge_subcomplex,
    simplex_measure,
    subcomplex,
    tangent_plane,
)
from varifrac.geometry.dto import MeshDTO, complex_from_mesh_json, write_mesh_json
from varifrac.geometry.fixtures import flat_disk, icosphere, polygon_circle, polyline, rectangle_mesh
from varifrac.geometry.grassmann import plane_from_vectors
from varifrac.geometry.quadrature import simplex_rule
from varifrac.geometry.refine import refine


def test_tangent_plane_of_diagonal_edge():
    square = rectangle_mesh(1, 1)
    plane = tangent_plane([0, 3], square)
    expected = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]])
    assert plane.k == 1
    assert np.allclose(plane.proj, expected)
    assert np.allclose(plane.proj @ plane.proj, plane.proj)


def test_tangent_plane_of_triangle_in_space():
    disk, _ = flat_disk(n_rim=8, rings=2)
    tri = disk.simplices[2][0]
    plane = tangent_plane(tri, disk)
    assert plane.k == 2
    assert np.allclose(plane.proj, np.diag([1.0, 1.0, 0.0]))


def test_tangent_plane_rejects_full_dimensional_simplex():
    square = rectangle_mesh(1, 1)
    with pytest.raises(DimensionError):
        tangent_plane(square.simplices[2][0], square)


def test_simplex_measures():
    square = rectangle_mesh(2, 2, width=2.0, height=2.0)
    assert float(simplex_measure([0, 1], square)) == pytest.approx(1.0)
    assert float(simplex_measure(square.simplices[2][0], square)) == pytest.approx(0.5)
    assert float(simplex_measure([4], square)) == 1.0
    assert np.sum(square.measures(2)) == pytest.approx(4.0)


def test_degenerate_simplices_are_rejected():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(DegenerateSimplexError):
        SimplicialComplex.from_simplices(pts, {2: [(0, 1, 2)]})
    line = polyline(pts)
    with pytest.raises(DegenerateSimplexError):
        simplex_measure([0, 1, 2], line)


def test_unknown_ids_raise():
    square = rectangle_mesh(1, 1)
    with pytest.raises(IdError):
        square.simplex((1, 99))
    with pytest.raises(IdError):
        simplex_measure([0, 17], square)


def test_rectangle_mesh_indexing():
    mesh = rectangle_mesh(4, 4)
    assert len(mesh.vertices) == 25
    assert mesh.count(2) == 32
    assert mesh.count(1) == 56
    assert len(mesh.computed_boundary_facets) == 16
    assert len(mesh.interior_edge_ids) == 40
    assert np.allclose(mesh.vertices[2 * 5 + 3], [0.75, 0.5])
    assert len(mesh.boundary_vertex_ids) == 16
    assert mesh.max_edge_length == pytest.approx(np.sqrt(2.0) / 4.0)


def test_triangles_are_positively_oriented():
    mesh = rectangle_mesh(3, 2)
    pts = mesh.vertices[mesh.simplices[2]]
    jac = np.stack([pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0]], axis=2)
    assert np.all(np.linalg.det(jac) > 0.0)


def test_subcomplex_is_closed_and_maps_to_parent():
    mesh = rectangle_mesh(2, 2)
    sub = subcomplex(mesh, [(2, 0)])
    assert sub.count(2) == 1
    assert sub.count(1) == 3
    assert sub.count(0) == 3
    assert sub.vertices is mesh.vertices
    for k in range(3):
        assert np.array_equal(mesh.simplices[k][sub.parent_index[k]], sub.simplices[k])


def test_subcomplex_of_nothing_is_empty():
    mesh = rectangle_mesh(2, 2)
    assert subcomplex(mesh, []).is_empty


def test_boundary_vertices_of_open_and_closed_curves():
    segment = polyline(np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]))
    ends = boundary_vertices(segment)
    assert sorted(ends) == [0, 2]
    assert np.allclose(ends[0], [1.0, 0.0])
    assert np.allclose(ends[2], [-1.0, 0.0])
    assert boundary_vertices(polygon_circle(12)) == {}


def test_boundary_vertices_of_a_branch_point():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    star = SimplicialComplex.from_simplices(pts, {1: [(0, 1), (0, 2), (0, 3)]})
    ends = boundary_vertices(star)
    assert sorted(ends) == [0, 1, 2, 3]
    assert np.allclose(ends[0], [0.0, 1.0])


def test_edge_subcomplex_of_a_crack_path():
    mesh = rectangle_mesh(4, 4)
    lookup = mesh.edge_lookup
    path = [lookup[(10, 11)], lookup[(11, 12)]]
    crack = edge_subcomplex(mesh, path)
    assert crack.dim == 1
    assert sorted(boundary_vertices(crack)) == [10, 12]


@pytest.mark.parametrize("k, degree", [(1, 1), (1, 5), (2, 2), (2, 9), (3, 4)])
def test_simplex_rules_integrate_monomials(k, degree):
    bary, weights = simplex_rule(k, degree)
    assert weights.sum() == pytest.approx(1.0)
    # reference simplex with unit-normalized measure: E[λ_1^a] = a! k! / (a + k)!
    a = degree
    expected = np.prod(np.arange(1, a + 1)) * np.prod(np.arange(1, k + 1)) / np.prod(np.arange(1, a + k + 1))
    assert np.sum(weights * bary[:, 1] ** a) == pytest.approx(expected, rel=1e-12)


def test_refined_circle_stays_on_the_circle():
    circle = polygon_circle(8, radius=2.0)
    fine = refine(circle)
    assert fine.count(1) == 16
    used = np.unique(fine.simplices[1])
    assert np.allclose(np.linalg.norm(fine.vertices[used], axis=1), 2.0)


def test_refined_surface_keeps_area():
    sphere = icosphere(1)
    fine = refine(sphere)
    assert fine.count(2) == 4 * sphere.count(2)
    assert np.sum(fine.measures(2)) == pytest.approx(np.sum(sphere.measures(2)))


def test_flat_disk_shares_vertices_with_rim():
    disk, rim = flat_disk(n_rim=16, rings=3)
    assert np.array_equal(disk.vertices, rim.vertices)
    assert rim.count(1) == 16
    assert np.allclose(disk.vertices[:, 2], 0.0)


def test_plane_from_vectors():
    plane = plane_from_vectors(np.array([3.0, 4.0]))
    assert np.allclose(plane.proj @ np.array([3.0, 4.0]), [3.0, 4.0])
    assert np.allclose(plane.complement @ np.array([3.0, 4.0]), 0.0)


def test_mesh_json_round_trip(tmp_path):
    mesh = rectangle_mesh(3, 2)
    path = write_mesh_json(mesh, tmp_path / "mesh.json")
    loaded = complex_from_mesh_json(path)
    assert np.allclose(loaded.vertices, mesh.vertices)
    assert loaded.count(2) == mesh.count(2)
    assert loaded.computed_boundary_facets == frozenset(
        loaded.facet_lookup[tuple(sorted(mesh.simplices[1][e].tolist()))] for e in mesh.computed_boundary_facets
    )


def test_malformed_mesh_json_reports_position(write_json):
    path = write_json("broken.json", '{"dim": 2,\n "vertices": [[0, 0], [1, 0]\n')
    with pytest.raises(MeshParseError) as err:
        complex_from_mesh_json(path)
    assert err.value.details["line"] >= 2
    assert "offset" in err.value.details


def test_mesh_schema_violations_are_parse_errors():
    with pytest.raises(MeshParseError):
        complex_from_mesh_json({"dim": 2, "vertices": [[0.0, 0.0]], "edges": [[0, 3]]})
    with pytest.raises(MeshParseError):
        complex_from_mesh_json({"dim": 2, "vertices": [[0.0, 0.0]], "colour": "red"})


def test_mesh_dto_of_a_curve():
    curve = polygon_circle(6)
    dto = MeshDTO.from_complex(curve)
    assert dto.triangles == []
    assert len(dto.edges) == 6
    assert dto.to_complex().dim == 1
