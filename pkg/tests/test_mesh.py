"""Structured rectangle triangulations."""

import numpy as np
import pytest

from fluxbound.mesh import LOCAL_EDGE_VERTICES, TriMesh, build_rect_mesh, mesh_to_text


def unit_square_mesh(n, diagonal="right"):
    return build_rect_mesh((0.0, 1.0), (0.0, 1.0), n, n, diagonal=diagonal)


class TestBuildRectMesh:
    def test_counts_20x20(self):
        mesh = unit_square_mesh(20)
        assert mesh.num_vertices == 441
        assert mesh.num_triangles == 800
        assert mesh.num_edges == 1240

    @pytest.mark.parametrize("nx,ny", [(1, 1), (3, 2), (5, 7)])
    def test_euler_characteristic(self, nx, ny):
        mesh = build_rect_mesh((0, 2), (-1, 1), nx, ny)
        assert mesh.num_vertices - mesh.num_edges + mesh.num_triangles == 1

    def test_triangles_counterclockwise(self):
        for diagonal in ("right", "left"):
            mesh = unit_square_mesh(4, diagonal)
            assert np.all(mesh.det_jacobians > 0)

    def test_areas_sum_to_rectangle(self):
        mesh = build_rect_mesh((0, 3), (1, 2), 5, 4)
        assert mesh.areas.sum() == pytest.approx(3.0, rel=1e-14)

    def test_vertices_row_major(self):
        mesh = build_rect_mesh((0, 1), (0, 1), 2, 2)
        assert np.allclose(mesh.vertices[0], [0, 0])
        assert np.allclose(mesh.vertices[1], [0.5, 0])
        assert np.allclose(mesh.vertices[3], [0, 0.5])

    def test_edges_sorted_and_oriented(self):
        mesh = unit_square_mesh(5)
        assert np.all(mesh.edges[:, 0] < mesh.edges[:, 1])
        order = np.lexsort((mesh.edges[:, 1], mesh.edges[:, 0]))
        assert np.array_equal(order, np.arange(mesh.num_edges))

    def test_tri_edges_match_vertex_pairs(self):
        mesh = unit_square_mesh(3)
        a = mesh.triangles[:, LOCAL_EDGE_VERTICES[:, 0]]
        b = mesh.triangles[:, LOCAL_EDGE_VERTICES[:, 1]]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        assert np.array_equal(mesh.edges[mesh.tri_edges],
                              np.stack([lo, hi], axis=-1))
        assert np.array_equal(mesh.tri_edge_signs, np.where(a < b, 1, -1))

    def test_boundary_flags(self):
        n = 6
        mesh = unit_square_mesh(n)
        assert mesh.boundary_edge_flags.sum() == 4 * n
        assert mesh.boundary_vertex_flags.sum() == 4 * n
        on_rim = ((mesh.vertices == 0.0) | (mesh.vertices == 1.0)).any(axis=1)
        assert np.array_equal(mesh.boundary_vertex_flags, on_rim)

    def test_interior_edges_used_twice(self):
        mesh = unit_square_mesh(4)
        use = np.bincount(mesh.tri_edges.ravel(), minlength=mesh.num_edges)
        assert np.all(use[mesh.boundary_edge_flags] == 1)
        assert np.all(use[~mesh.boundary_edge_flags] == 2)

    def test_diagonal_direction(self):
        right = unit_square_mesh(1, "right")
        left = unit_square_mesh(1, "left")
        assert not np.array_equal(right.triangles, left.triangles)
        # the shared diagonal edge differs: (0,3) for right, (1,2) for left
        assert [0, 3] in right.edges.tolist()
        assert [1, 2] in left.edges.tolist()

    def test_deterministic_rebuild(self):
        m1 = unit_square_mesh(7)
        m2 = unit_square_mesh(7)
        assert np.array_equal(m1.vertices, m2.vertices)
        assert np.array_equal(m1.triangles, m2.triangles)
        assert np.array_equal(m1.edges, m2.edges)

    @pytest.mark.parametrize("bad", [
        dict(nx=0, ny=1),
        dict(nx=1, ny=-2),
    ])
    def test_invalid_cell_counts(self, bad):
        with pytest.raises(ValueError):
            build_rect_mesh((0, 1), (0, 1), **bad)

    def test_invalid_rectangle(self):
        with pytest.raises(ValueError):
            build_rect_mesh((1, 1), (0, 1), 2, 2)
        with pytest.raises(ValueError):
            build_rect_mesh((0, 1), (2, 1), 2, 2)

    def test_invalid_diagonal(self):
        with pytest.raises(ValueError):
            build_rect_mesh((0, 1), (0, 1), 2, 2, diagonal="crossed")


class TestGeometryCaches:
    def test_jacobian_columns_are_edge_vectors(self):
        mesh = build_rect_mesh((0, 2), (0, 1), 2, 2)
        p = mesh.vertices[mesh.triangles]
        assert np.allclose(mesh.jacobians[:, :, 0], p[:, 1] - p[:, 0])
        assert np.allclose(mesh.jacobians[:, :, 1], p[:, 2] - p[:, 0])

    def test_inverse_transpose(self):
        mesh = build_rect_mesh((0, 2), (0, 3), 3, 2)
        prod = np.einsum("tab,tcb->tac", mesh.jacobians, mesh.inv_jacobians_t)
        assert np.allclose(prod, np.eye(2)[None], atol=1e-13)

    def test_arrays_immutable(self):
        mesh = unit_square_mesh(2)
        for arr in (mesh.vertices, mesh.triangles, mesh.edges,
                    mesh.jacobians, mesh.det_jacobians):
            with pytest.raises(ValueError):
                arr[(0,) * arr.ndim] = 0


class TestMeshToText:
    def test_sections_and_counts(self):
        mesh = unit_square_mesh(2)
        text = mesh_to_text(mesh)
        lines = text.splitlines()
        assert lines[0] == f"vertices {mesh.num_vertices}"
        assert f"triangles {mesh.num_triangles}" in lines
        assert f"edges {mesh.num_edges}" in lines
        total = 3 + mesh.num_vertices + mesh.num_triangles + mesh.num_edges
        assert len(lines) == total


class TestTriMeshDirect:
    def test_single_triangle_mesh(self):
        mesh = TriMesh(
            vertices=[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles=[[0, 1, 2]],
            edges=[[0, 1], [0, 2], [1, 2]],
            tri_edges=[[2, 1, 0]],
            tri_edge_signs=[[1, -1, 1]],
            boundary_edge_flags=[True, True, True],
            boundary_vertex_flags=[True, True, True],
        )
        assert mesh.areas[0] == pytest.approx(0.5)
        assert mesh.det_jacobians[0] == pytest.approx(1.0)
