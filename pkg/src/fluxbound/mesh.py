"""Structured triangulations of axis-aligned rectangles.

The mesh carries a canonical edge enumeration (edges sorted
lexicographically by their low/high vertex pair, oriented from the low
vertex index to the high one) so that H(div) elements get a globally
consistent normal direction on every edge.
"""

from functools import cached_property

import numpy as np

__all__ = ["TriMesh", "build_rect_mesh", "mesh_to_text"]

# local edge i sits opposite local vertex i and is traversed
# counterclockwise: (v1,v2), (v2,v0), (v0,v1)
LOCAL_EDGE_VERTICES = np.array([[1, 2], [2, 0], [0, 1]])


class TriMesh:
    """Immutable triangulation of a simply connected planar region.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counterclockwise vertex triples
    edges : (ne, 2) int array, each row (lo, hi) with lo < hi; rows are
        sorted lexicographically.  The global edge direction is lo -> hi
        and the global edge normal is that direction rotated by -90 deg.
    tri_edges : (nt, 3) int array, global edge index of each local edge
        (local edge i is opposite local vertex i).
    tri_edge_signs : (nt, 3) int array, +1 where the local traversal of
        the edge agrees with the global lo -> hi direction, -1 otherwise.
    boundary_edge_flags, boundary_vertex_flags : bool arrays
    """

    def __init__(self, vertices, triangles, edges, tri_edges, tri_edge_signs,
                 boundary_edge_flags, boundary_vertex_flags):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.edges = np.ascontiguousarray(edges, dtype=np.int64)
        self.tri_edges = np.ascontiguousarray(tri_edges, dtype=np.int64)
        self.tri_edge_signs = np.ascontiguousarray(tri_edge_signs, dtype=np.int64)
        self.boundary_edge_flags = np.ascontiguousarray(boundary_edge_flags, dtype=bool)
        self.boundary_vertex_flags = np.ascontiguousarray(boundary_vertex_flags, dtype=bool)
        for arr in (self.vertices, self.triangles, self.edges, self.tri_edges,
                    self.tri_edge_signs, self.boundary_edge_flags,
                    self.boundary_vertex_flags):
            arr.flags.writeable = False

    @property
    def num_vertices(self):
        return self.vertices.shape[0]

    @property
    def num_triangles(self):
        return self.triangles.shape[0]

    @property
    def num_edges(self):
        return self.edges.shape[0]

    @cached_property
    def jacobians(self):
        """Affine maps x = v0 + J xhat, one (2, 2) Jacobian per triangle.

        Columns of J are the physical edge vectors v1 - v0 and v2 - v0.
        """
        p = self.vertices[self.triangles]          # (nt, 3, 2)
        jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)
        jac.flags.writeable = False
        return jac

    @cached_property
    def det_jacobians(self):
        jac = self.jacobians
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        det.flags.writeable = False
        return det

    @cached_property
    def inv_jacobians_t(self):
        """Inverse transpose of each Jacobian, for gradient push-forward."""
        jac = self.jacobians
        det = self.det_jacobians
        inv_t = np.empty_like(jac)
        inv_t[:, 0, 0] = jac[:, 1, 1]
        inv_t[:, 0, 1] = -jac[:, 1, 0]
        inv_t[:, 1, 0] = -jac[:, 0, 1]
        inv_t[:, 1, 1] = jac[:, 0, 0]
        inv_t /= det[:, None, None]
        inv_t.flags.writeable = False
        return inv_t

    @cached_property
    def areas(self):
        area = 0.5 * self.det_jacobians
        area.flags.writeable = False
        return area

    def __repr__(self):
        return (f"TriMesh(vertices={self.num_vertices}, "
                f"triangles={self.num_triangles}, edges={self.num_edges})")


def build_rect_mesh(x_range, y_range, nx, ny, diagonal="right"):
    """Triangulate the rectangle x_range x y_range into 2*nx*ny triangles.

    Vertices are numbered row-major (x fastest).  Each grid cell is split
    along its diagonal: "right" runs lower-left to upper-right, "left"
    runs lower-right to upper-left.  Regenerating with identical
    arguments yields bit-identical connectivity.

    Parameters
    ----------
    x_range, y_range : pair of floats, (lo, hi) with lo < hi
    nx, ny : number of cells per direction, at least 1
    diagonal : "right" or "left"
    """
    nx, ny = int(nx), int(ny)
    if nx < 1 or ny < 1:
        raise ValueError(f"mesh needs at least one cell per direction, got {nx}x{ny}")
    x0, x1 = map(float, x_range)
    y0, y1 = map(float, y_range)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("empty rectangle")
    if diagonal not in ("right", "left"):
        raise ValueError(f"diagonal must be 'right' or 'left', got {diagonal!r}")

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    xg, yg = np.meshgrid(xs, ys)                   # row-major: index j*(nx+1)+i
    vertices = np.column_stack([xg.ravel(), yg.ravel()])

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny))
    v00 = (jj * (nx + 1) + ii).ravel()
    v10 = v00 + 1
    v01 = v00 + (nx + 1)
    v11 = v01 + 1

    ncell = nx * ny
    triangles = np.empty((2 * ncell, 3), dtype=np.int64)
    if diagonal == "right":
        triangles[0::2] = np.column_stack([v00, v10, v11])
        triangles[1::2] = np.column_stack([v00, v11, v01])
    else:
        triangles[0::2] = np.column_stack([v00, v10, v01])
        triangles[1::2] = np.column_stack([v10, v11, v01])

    # gather the three directed local edges of every triangle, canonicalize
    # to (lo, hi), and dedupe; np.unique sorts rows lexicographically which
    # fixes the global edge numbering
    a = triangles[:, LOCAL_EDGE_VERTICES[:, 0]]    # (nt, 3)
    b = triangles[:, LOCAL_EDGE_VERTICES[:, 1]]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    pairs = np.column_stack([lo.ravel(), hi.ravel()])
    edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
    tri_edges = inverse.reshape(-1, 3)
    tri_edge_signs = np.where(a < b, 1, -1)

    edge_use = np.bincount(tri_edges.ravel(), minlength=edges.shape[0])
    boundary_edge_flags = edge_use == 1
    boundary_vertex_flags = np.zeros(vertices.shape[0], dtype=bool)
    boundary_vertex_flags[edges[boundary_edge_flags].ravel()] = True

    return TriMesh(vertices, triangles, edges, tri_edges, tri_edge_signs,
                   boundary_edge_flags, boundary_vertex_flags)


def mesh_to_text(mesh):
    """Plain-text dump (vertices / triangles / edges sections) for debugging."""
    lines = [f"vertices {mesh.num_vertices}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines.append(f"triangles {mesh.num_triangles}")
    lines += [f"{t[0]} {t[1]} {t[2]}" for t in mesh.triangles]
    lines.append(f"edges {mesh.num_edges}")
    lines += [f"{e[0]} {e[1]}" for e in mesh.edges]
    return "\n".join(lines) + "\n"
