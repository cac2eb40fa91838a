"""Global assembly of the primal system and of every majorant ingredient.

For a scalar approximation v and a flux field y = sum_i c_i phi_i the
squared bound splits into two quadratic forms in c:

  equilibrium part  ||div y + f||^2          = c^T S c + 2 c^T b + ||f||^2
  duality part      (A^{-1}B(y - A grad v),
                     B(y - A grad v))        = 1/2 c^T M c - c^T z + g

with

  S_ij = (div phi_j, div phi_i)
  M_ij = (A^{-1}B phi_j, B phi_i) + (A^{-1}B phi_i, B phi_j)
  b_i  = (f, div phi_i)
  z_i  = (A^{-1}B phi_i, B A grad v) + (A^{-1}B A grad v, B phi_i)
  g    = (A^{-1}B A grad v, B A grad v)

All five are assembled here in one pass over the elements.  Element
integrals are computed by contracting precomputed reference-basis
tensors with per-element 2x2 geometry/coefficient products, so the cost
is independent of the quadrature point count except for the terms
involving f and grad v.  S and M come from identical triplet streams and
therefore share their sparsity pattern, which the minimizer exploits
when forming their linear combination once per iteration.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AssemblyError, IncompatibleSpacesError, MissingExactSolutionError
from .quadrature import MAX_DEGREE, rule_for_degree
from .sparse import CSRMatrix, assemble_from_triplets, nonsym_solve
from .spaces import (FluxSpace, ScalarField, ScalarSpace, _rt_basis_at,
                     _scalar_reference_basis)

__all__ = [
    "MajorantSystem",
    "assemble_primal",
    "assemble_majorant",
    "solve_primal",
    "energy_error",
]


def _default_degree(*orders, extra=4):
    return min(MAX_DEGREE, 2 * max(orders) + extra)


@lru_cache(maxsize=None)
def _scalar_tables(order, degree):
    rule = rule_for_degree(degree)
    vals, grads = _scalar_reference_basis(order, rule.points)
    vals.flags.writeable = False
    grads.flags.writeable = False
    return rule, vals, grads


@lru_cache(maxsize=None)
def _flux_tables(order, degree):
    """Reference RT tables: values, divergences, and their moment tensors.

    t4[i, j, a, b] = sum_q w_q vhat_i,a vhat_j,b and
    ts[i, j] = sum_q w_q divhat_i divhat_j; contracting t4 with the
    per-element 2x2 matrix J^T C J / det J yields the element matrix of
    any constant-coefficient weighted mass form in one einsum.
    """
    rule = rule_for_degree(degree)
    vals, divs = _rt_basis_at(order, rule.points)
    t4 = np.einsum("iqa,jqb,q->ijab", vals, vals, rule.weights)
    ts = np.einsum("iq,jq,q->ij", divs, divs, rule.weights)
    for arr in (vals, divs, t4, ts):
        arr.flags.writeable = False
    return rule, vals, divs, t4, ts


def _check_ccw(mesh):
    if np.any(mesh.det_jacobians <= 0.0):
        raise AssemblyError("mesh triangles must be counterclockwise")


def _physical_points(mesh, ref_pts):
    origins = mesh.vertices[mesh.triangles[:, 0]]
    return origins[:, None, :] + np.einsum("tab,qb->tqa", mesh.jacobians, ref_pts)


def _v_ref_gradients(v, grads):
    """Reference gradients of the scalar field at the table's points, (nt, nq, 2)."""
    local = v.coeffs[v.space.cell_dofs]            # (nt, nloc)
    return np.einsum("tj,jqa->tqa", local, grads)


@dataclass(frozen=True, eq=False)
class MajorantSystem:
    """Assembled ingredients of the majorant for one (v, flux space) pair.

    s and m share their sparsity pattern; f_norm_sq and g are the
    constant terms of the equilibrium and duality parts.
    """

    s: CSRMatrix
    m: CSRMatrix
    b: np.ndarray
    z: np.ndarray
    f_norm_sq: float
    g: float
    flux_space: FluxSpace
    c_f: float
    lambda_low: float


def assemble_primal(space, problem, quad_degree=None, eliminate_boundary=True):
    """Stiffness matrix K_ij = (A grad phi_j, grad phi_i) and load vector.

    With eliminate_boundary (the default), rows and columns of the
    homogeneous Dirichlet DOFs are removed and the system is indexed by
    space.interior_dofs; otherwise the full matrix is returned.
    """
    if not isinstance(space, ScalarSpace):
        raise IncompatibleSpacesError("primal assembly needs a ScalarSpace")
    mesh = space.mesh
    _check_ccw(mesh)
    degree = _default_degree(space.order) if quad_degree is None else quad_degree
    rule, vals, grads = _scalar_tables(space.order, degree)
    w = rule.weights
    a = problem.coefficients.a
    invjt = mesh.inv_jacobians_t
    det = mesh.det_jacobians

    h = np.einsum("tca,cd,tdb->tab", invjt, a, invjt) * det[:, None, None]
    k_elem = np.einsum("iqa,tab,jqb,q->tij", grads, h, grads, w)

    pts = _physical_points(mesh, rule.points)
    f_vals = problem.f(pts[..., 0], pts[..., 1])
    f_elem = np.einsum("tq,q,iq,t->ti", f_vals, w, vals, det)

    cdofs = space.cell_dofs
    load = np.bincount(cdofs.ravel(), weights=f_elem.ravel(),
                       minlength=space.dof_count)
    nloc = space.local_dim
    if not eliminate_boundary:
        rows = np.broadcast_to(cdofs[:, :, None], k_elem.shape)
        cols = np.broadcast_to(cdofs[:, None, :], k_elem.shape)
        mat = assemble_from_triplets((space.dof_count, space.dof_count),
                                     rows.ravel(), cols.ravel(), k_elem.ravel())
        return mat, load

    imap = np.full(space.dof_count, -1, dtype=np.int64)
    n_int = len(space.interior_dofs)
    imap[space.interior_dofs] = np.arange(n_int)
    local = imap[cdofs]                            # (nt, nloc), -1 on boundary
    rows = np.broadcast_to(local[:, :, None], (mesh.num_triangles, nloc, nloc))
    cols = np.broadcast_to(local[:, None, :], (mesh.num_triangles, nloc, nloc))
    keep = (rows >= 0) & (cols >= 0)
    mat = assemble_from_triplets((n_int, n_int), rows[keep], cols[keep],
                                 k_elem[keep])
    return mat, load[space.interior_dofs]


def solve_primal(space, problem, tol=1e-10, maxit=None, quad_degree=None):
    """Galerkin solution of the primal problem as a ScalarField."""
    mat, rhs = assemble_primal(space, problem, quad_degree=quad_degree)
    interior = nonsym_solve(mat, rhs, tol=tol, maxit=maxit)
    coeffs = np.zeros(space.dof_count)
    coeffs[space.interior_dofs] = interior
    return ScalarField(space, coeffs)


def assemble_majorant(flux_space, v, problem, quad_degree=None):
    """Assemble S, M, b, z, ||f||^2 and g for the given approximation v."""
    if not isinstance(flux_space, FluxSpace):
        raise IncompatibleSpacesError("majorant assembly needs a FluxSpace")
    if flux_space.mesh is not v.space.mesh:
        raise IncompatibleSpacesError(
            "flux space and scalar field live on different meshes")
    mesh = flux_space.mesh
    _check_ccw(mesh)
    r = flux_space.order
    degree = (_default_degree(v.space.order, r + 1) if quad_degree is None
              else quad_degree)
    rule, rt_vals, rt_divs, t4, ts = _flux_tables(r, degree)
    _, _, s_grads = _scalar_tables(v.space.order, degree)
    w = rule.weights

    model = problem.coefficients
    a, a_inv, bmat = model.a, model.a_inv, model.b
    w_dual = bmat.T @ a_inv @ bmat                 # weight of (A^{-1}B., B.)
    w_sym2 = w_dual + w_dual.T

    jac = mesh.jacobians
    det = mesh.det_jacobians
    invjt = mesh.inv_jacobians_t
    signs = flux_space.cell_signs
    sign_pairs = signs[:, :, None] * signs[:, None, :]

    # element matrices: S from the divergence tensor, M from the moment
    # tensor contracted with J^T (W + W^T) J / det J
    s_elem = ts[None, :, :] / det[:, None, None] * sign_pairs
    h = np.einsum("tca,cd,tdb->tab", jac, w_sym2, jac) / det[:, None, None]
    m_elem = np.einsum("ijab,tab->tij", t4, h) * sign_pairs

    pts = _physical_points(mesh, rule.points)
    f_vals = problem.f(pts[..., 0], pts[..., 1])
    b_elem = np.einsum("tq,q,iq->ti", f_vals, w, rt_divs) * signs
    f_norm_sq = float(np.einsum("tq,q,t->", f_vals**2, w, det))

    ghat = _v_ref_gradients(v, s_grads)
    # z pairs each flux basis function with A grad v: J^T (W + W^T) A J^{-T}
    gmat = np.einsum("tca,cd,de,teb->tab", jac, w_sym2, a, invjt)
    z_elem = np.einsum("iqb,tba,tqa,q->ti", rt_vals, gmat, ghat, w) * signs
    # constant duality term: J^{-1} A^T W A J^{-T} det J
    q_const = a.T @ w_dual @ a
    hg = np.einsum("tca,cd,tdb->tab", invjt, q_const, invjt) * det[:, None, None]
    g = float(np.einsum("tqa,tab,tqb,q->", ghat, hg, ghat, w))

    ndof = flux_space.dof_count
    cdofs = flux_space.cell_dofs
    shape3 = s_elem.shape
    rows = np.broadcast_to(cdofs[:, :, None], shape3).ravel()
    cols = np.broadcast_to(cdofs[:, None, :], shape3).ravel()
    s_mat = assemble_from_triplets((ndof, ndof), rows, cols, s_elem.ravel())
    m_mat = assemble_from_triplets((ndof, ndof), rows, cols, m_elem.ravel())
    b_vec = np.bincount(cdofs.ravel(), weights=b_elem.ravel(), minlength=ndof)
    z_vec = np.bincount(cdofs.ravel(), weights=z_elem.ravel(), minlength=ndof)

    return MajorantSystem(s=s_mat, m=m_mat, b=b_vec, z=z_vec,
                          f_norm_sq=f_norm_sq, g=g, flux_space=flux_space,
                          c_f=problem.c_f, lambda_low=model.lambda_low)


def energy_error(v, problem, quad_degree=None):
    """Squared energy norm (A grad(u - v), grad(u - v)) against the exact u."""
    if not problem.has_exact_solution:
        raise MissingExactSolutionError(
            "problem carries no exact solution gradient")
    mesh = v.space.mesh
    _check_ccw(mesh)
    degree = (_default_degree(v.space.order, extra=6) if quad_degree is None
              else quad_degree)
    rule, _, s_grads = _scalar_tables(v.space.order, degree)
    w = rule.weights
    det = mesh.det_jacobians

    ghat = _v_ref_gradients(v, s_grads)
    grad_v = np.einsum("tab,tqb->tqa", mesh.inv_jacobians_t, ghat)
    pts = _physical_points(mesh, rule.points)
    grad_u = problem.exact_grad_u(pts[..., 0], pts[..., 1])
    diff = grad_u - grad_v
    a = problem.coefficients.a
    return float(np.einsum("tqa,ab,tqb,q,t->", diff, a, diff, w, det))
