"""Reference bases and global DOF maps for the scalar and flux spaces.

Scalar spaces are continuous Lagrange elements of order 1 or 2 (vertex
DOFs, plus edge-midpoint DOFs at order 2).

Flux spaces are Raviart-Thomas elements RT_r, r in {0, 1, 2}, built on
the local polynomial space (P_r)^2 + x * homogeneous(P_r).  Degrees of
freedom are

  * per edge, moments of the normal component against shifted Legendre
    polynomials P_0..P_r in the edge parameter, taken with respect to the
    mesh's global edge direction and normal, and
  * for r >= 1, interior moments of the reference pullback against the
    monomial basis of (P_{r-1})^2.

The reference basis is dual to the outward-normal / local-parameter
functionals; switching an edge to the global orientation multiplies the
edge DOF by sign^(k+1) (normal flip times Legendre parity), which is
folded into a per-cell sign table.  Values are pushed forward with the
contravariant Piola map y = J yhat / det J, divergences with
div y = divhat / det J, so normal traces match across interior edges by
construction.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import legval

from .errors import IncompatibleSpacesError
from .mesh import LOCAL_EDGE_VERTICES
from .quadrature import gauss01, rule_for_degree

__all__ = [
    "ScalarSpace",
    "FluxSpace",
    "ScalarField",
    "eval_scalar_basis",
    "eval_flux_basis",
]

REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
# outward unit normals of the counterclockwise local edges (1,2), (2,0), (0,1)
REF_EDGE_NORMALS = np.array([
    [1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)],
    [-1.0, 0.0],
    [0.0, -1.0],
])
REF_EDGE_LENGTHS = np.array([np.sqrt(2.0), 1.0, 1.0])


# ---------------------------------------------------------------------------
# scalar reference bases

def _scalar_reference_basis(order, pts):
    """Values (nloc, npts) and reference gradients (nloc, npts, 2)."""
    pts = np.asarray(pts, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    lam = np.stack([1.0 - x - y, x, y])                   # (3, npts)
    dlam = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    if order == 1:
        vals = lam
        grads = np.broadcast_to(dlam[:, None, :], (3, len(x), 2)).copy()
        return vals, grads
    if order == 2:
        vals = np.empty((6, len(x)))
        grads = np.empty((6, len(x), 2))
        for i in range(3):
            vals[i] = lam[i] * (2.0 * lam[i] - 1.0)
            grads[i] = (4.0 * lam[i] - 1.0)[:, None] * dlam[i]
        for i in range(3):
            a, b = LOCAL_EDGE_VERTICES[i]
            vals[3 + i] = 4.0 * lam[a] * lam[b]
            grads[3 + i] = 4.0 * (lam[a][:, None] * dlam[b] + lam[b][:, None] * dlam[a])
        return vals, grads
    raise ValueError(f"scalar order must be 1 or 2, got {order}")


# ---------------------------------------------------------------------------
# Raviart-Thomas reference element

@lru_cache(maxsize=None)
def _rt_dictionary(r):
    """Spanning set of the local RT_r space as monomial descriptors.

    kind 0 -> (x^a y^b, 0), kind 1 -> (0, x^a y^b),
    kind 2 -> x * x^a y^b with a + b = r, i.e. (x^(a+1) y^b, x^a y^(b+1)).
    """
    terms = []
    for comp in (0, 1):
        for d in range(r + 1):
            for a in range(d, -1, -1):
                terms.append((comp, a, d - a))
    for a in range(r, -1, -1):
        terms.append((2, a, r - a))
    return tuple(terms)


def _dict_values(r, pts):
    x, y = pts[:, 0], pts[:, 1]
    terms = _rt_dictionary(r)
    vals = np.zeros((len(terms), len(x), 2))
    for idx, (kind, a, b) in enumerate(terms):
        mono = x**a * y**b
        if kind == 0:
            vals[idx, :, 0] = mono
        elif kind == 1:
            vals[idx, :, 1] = mono
        else:
            vals[idx, :, 0] = x * mono
            vals[idx, :, 1] = y * mono
    return vals


def _dict_divergences(r, pts):
    x, y = pts[:, 0], pts[:, 1]
    terms = _rt_dictionary(r)
    divs = np.zeros((len(terms), len(x)))
    for idx, (kind, a, b) in enumerate(terms):
        if kind == 0:
            if a > 0:
                divs[idx] = a * x**(a - 1) * y**b
        elif kind == 1:
            if b > 0:
                divs[idx] = b * x**a * y**(b - 1)
        else:
            divs[idx] = (a + b + 2) * x**a * y**b
    return divs


def _shifted_legendre(k, t):
    coeffs = np.zeros(k + 1)
    coeffs[k] = 1.0
    return legval(2.0 * t - 1.0, coeffs)


def _p_monomials(degree):
    return [(a, d - a) for d in range(degree + 1) for a in range(d, -1, -1)]


@lru_cache(maxsize=None)
def _rt_reference_basis(r):
    """Dual-basis coefficients over the monomial dictionary.

    Returns (vandermonde, coeffs) with coeffs = vandermonde^{-1}; basis
    function j has dictionary coefficients coeffs[:, j].  Rows of the
    Vandermonde are the DOF functionals in local order: edge-major edge
    moments (edge 0..2, Legendre index 0..r), then interior moments
    (component 0 then 1, P_{r-1} monomials in graded order).
    """
    if r not in (0, 1, 2):
        raise ValueError(f"flux order must be 0, 1 or 2, got {r}")
    ndof = (r + 1) * (r + 3)
    vand = np.zeros((ndof, ndof))
    row = 0

    tq, wq = gauss01(r + 2)
    for i in range(3):
        a_vert = REF_VERTICES[LOCAL_EDGE_VERTICES[i, 0]]
        b_vert = REF_VERTICES[LOCAL_EDGE_VERTICES[i, 1]]
        pts = a_vert + tq[:, None] * (b_vert - a_vert)
        normal_component = _dict_values(r, pts) @ REF_EDGE_NORMALS[i]  # (ndof, nq)
        for k in range(r + 1):
            leg = _shifted_legendre(k, tq)
            vand[row] = REF_EDGE_LENGTHS[i] * normal_component @ (wq * leg)
            row += 1

    if r >= 1:
        rule = rule_for_degree(2 * r)
        vals = _dict_values(r, rule.points)
        x, y = rule.points[:, 0], rule.points[:, 1]
        for comp in (0, 1):
            for a, b in _p_monomials(r - 1):
                vand[row] = vals[:, :, comp] @ (rule.weights * x**a * y**b)
                row += 1

    sign, _ = np.linalg.slogdet(vand)
    if sign == 0 or np.linalg.cond(vand) > 1e8:
        raise RuntimeError(f"RT_{r} reference DOF set is not unisolvent")
    coeffs = np.linalg.inv(vand)
    vand.flags.writeable = False
    coeffs.flags.writeable = False
    return vand, coeffs


def _rt_basis_at(r, pts):
    """Reference basis values (ndof, npts, 2) and divergences (ndof, npts)."""
    _, coeffs = _rt_reference_basis(r)
    vals = np.einsum("mj,mqa->jqa", coeffs, _dict_values(r, pts))
    divs = np.einsum("mj,mq->jq", coeffs, _dict_divergences(r, pts))
    return vals, divs


# ---------------------------------------------------------------------------
# global spaces

class ScalarSpace:
    """Continuous Lagrange space of order 1 or 2 over a TriMesh."""

    def __init__(self, mesh, order):
        if order not in (1, 2):
            raise ValueError(f"scalar order must be 1 or 2, got {order}")
        self.mesh = mesh
        self.order = order
        nv = mesh.num_vertices
        if order == 1:
            self.dof_count = nv
            self.cell_dofs = mesh.triangles
            boundary = mesh.boundary_vertex_flags.copy()
        else:
            self.dof_count = nv + mesh.num_edges
            self.cell_dofs = np.ascontiguousarray(
                np.hstack([mesh.triangles, nv + mesh.tri_edges]))
            boundary = np.concatenate(
                [mesh.boundary_vertex_flags, mesh.boundary_edge_flags])
        self.boundary_dof_mask = boundary
        self.boundary_dofs = np.flatnonzero(boundary)
        self.interior_dofs = np.flatnonzero(~boundary)
        self.local_dim = self.cell_dofs.shape[1]
        for arr in (self.cell_dofs, self.boundary_dof_mask,
                    self.boundary_dofs, self.interior_dofs):
            arr.flags.writeable = False


class FluxSpace:
    """Raviart-Thomas space RT_r, r in {0, 1, 2}, over a TriMesh.

    Edge DOF (edge e, moment k) has global index e*(r+1) + k; the
    interior DOFs of triangle t follow after all edge DOFs.  cell_signs
    carries the orientation factor sign^(k+1) per local DOF.
    """

    def __init__(self, mesh, order):
        if order not in (0, 1, 2):
            raise ValueError(f"flux order must be 0, 1 or 2, got {order}")
        _rt_reference_basis(order)   # fail early if not unisolvent
        self.mesh = mesh
        self.order = order
        r = order
        nt, ne = mesh.num_triangles, mesh.num_edges
        n_per_edge = r + 1
        n_interior = r * (r + 1)
        self.dof_count = ne * n_per_edge + nt * n_interior
        self.local_dim = (r + 1) * (r + 3)

        cell_dofs = np.empty((nt, self.local_dim), dtype=np.int64)
        cell_signs = np.ones((nt, self.local_dim))
        for i in range(3):
            base = mesh.tri_edges[:, i] * n_per_edge
            for k in range(n_per_edge):
                cell_dofs[:, i * n_per_edge + k] = base + k
                if k % 2 == 0:   # sign^(k+1) is the edge sign for even k
                    cell_signs[:, i * n_per_edge + k] = mesh.tri_edge_signs[:, i]
        if n_interior:
            offset = ne * n_per_edge
            interior = offset + (np.arange(nt)[:, None] * n_interior
                                 + np.arange(n_interior)[None, :])
            cell_dofs[:, 3 * n_per_edge:] = interior
        self.cell_dofs = cell_dofs
        self.cell_signs = cell_signs
        for arr in (self.cell_dofs, self.cell_signs):
            arr.flags.writeable = False


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Coefficient vector attached to its scalar space."""

    space: ScalarSpace
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.space.dof_count,):
            raise IncompatibleSpacesError(
                f"coefficient vector of length {self.coeffs.shape} does not "
                f"match space with {self.space.dof_count} DOFs")


def eval_scalar_basis(space, tri, ref_pts):
    """Basis values and reference gradients of one triangle's local basis.

    Returns (values, gradients) with shapes (nloc, npts) and
    (nloc, npts, 2); gradients are with respect to reference coordinates
    (push forward with the inverse transposed Jacobian).
    """
    if not 0 <= tri < space.mesh.num_triangles:
        raise IndexError(f"triangle index {tri} out of range")
    return _scalar_reference_basis(space.order, np.atleast_2d(ref_pts))


def eval_flux_basis(space, tri, ref_pts):
    """Physical values and divergences of one triangle's local flux basis.

    Points are reference coordinates; values are mapped with the
    contravariant Piola transform J v / det J and divergences with
    1 / det J, then multiplied by the cell's orientation signs.  Shapes:
    (nloc, npts, 2) and (nloc, npts).
    """
    mesh = space.mesh
    if not 0 <= tri < mesh.num_triangles:
        raise IndexError(f"triangle index {tri} out of range")
    ref_vals, ref_divs = _rt_basis_at(space.order, np.atleast_2d(ref_pts))
    jac = mesh.jacobians[tri]
    det = mesh.det_jacobians[tri]
    signs = space.cell_signs[tri]
    vals = np.einsum("ab,jqb->jqa", jac, ref_vals) / det * signs[:, None, None]
    divs = ref_divs / det * signs[:, None]
    return vals, divs
