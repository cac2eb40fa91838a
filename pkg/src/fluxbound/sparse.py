"""Compressed sparse row matrices and the Krylov solvers built on them.

The matvec kernel has two interchangeable implementations: a compiled
extension (_csr_core, built from Cython) and a pure-numpy fallback.  The
compiled one is used when importable; setting the environment variable
FLUXBOUND_PURE_PYTHON=1 forces the fallback.  Both accumulate each row
in index order, so results agree to floating-point roundoff.

Assembly from triplets sorts duplicates into a canonical order before
summation, so the assembled matrix is bit-identical regardless of the
order in which element contributions were emitted.  Explicit zeros are
kept: matrices assembled from the same triplet positions share their
sparsity pattern exactly, which lets their linear combinations reuse the
pattern without re-sorting.
"""

import os

import numpy as np

from .errors import AssemblyError, SolverError

__all__ = [
    "CSRMatrix",
    "assemble_from_triplets",
    "cg_solve",
    "nonsym_solve",
    "kernel_backend",
]

_FORCE_PURE = os.environ.get("FLUXBOUND_PURE_PYTHON", "").strip().lower() in (
    "1", "true", "yes", "on")

if not _FORCE_PURE:
    try:
        from . import _csr_core
    except ImportError:
        _csr_core = None
else:
    _csr_core = None


def kernel_backend():
    """Name of the active matvec kernel: 'compiled' or 'python'."""
    return "python" if _csr_core is None else "compiled"


def _matvec_python(indptr, indices, data, x, out, row_ids):
    out[:] = np.bincount(row_ids, weights=data * x[indices],
                         minlength=len(indptr) - 1)


class CSRMatrix:
    """Immutable CSR matrix with sorted, duplicate-free rows."""

    def __init__(self, shape, indptr, indices, data, _validate=True):
        self.shape = (int(shape[0]), int(shape[1]))
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        if _validate:
            self._validate()
        self._row_ids = None
        for arr in (self.indptr, self.indices, self.data):
            arr.flags.writeable = False

    def _validate(self):
        nrows, ncols = self.shape
        if self.indptr.shape != (nrows + 1,):
            raise AssemblyError(
                f"indptr length {len(self.indptr)} does not match {nrows} rows")
        if self.indptr[0] != 0 or self.indptr[-1] != len(self.indices):
            raise AssemblyError("indptr endpoints inconsistent with index array")
        if np.any(np.diff(self.indptr) < 0):
            raise AssemblyError("indptr must be non-decreasing")
        if len(self.indices) != len(self.data):
            raise AssemblyError("indices and data lengths differ")
        if len(self.indices):
            if self.indices.min() < 0 or self.indices.max() >= ncols:
                raise AssemblyError("column index out of range")
            if len(self.indices) > 1:
                rows = np.repeat(np.arange(nrows), np.diff(self.indptr))
                same_row = rows[1:] == rows[:-1]
                if np.any(same_row & (np.diff(self.indices) <= 0)):
                    raise AssemblyError(
                        "columns must be strictly increasing within each row")

    @property
    def nnz(self):
        return len(self.data)

    def with_data(self, data):
        """Same sparsity pattern with replaced values (no re-validation)."""
        data = np.ascontiguousarray(data, dtype=np.float64)
        if data.shape != self.data.shape:
            raise AssemblyError("replacement data length does not match pattern")
        return CSRMatrix(self.shape, self.indptr, self.indices, data,
                         _validate=False)

    def _expanded_rows(self):
        if self._row_ids is None:
            self._row_ids = np.repeat(
                np.arange(self.shape[0], dtype=np.int64), np.diff(self.indptr))
        return self._row_ids

    def matvec(self, x, out=None):
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.shape[1],):
            raise ValueError(f"vector length {x.shape} does not match {self.shape}")
        if out is None:
            out = np.empty(self.shape[0])
        if _csr_core is not None:
            _csr_core.csr_matvec(self.indptr, self.indices, self.data, x, out)
        else:
            _matvec_python(self.indptr, self.indices, self.data, x, out,
                           self._expanded_rows())
        return out

    def __matmul__(self, x):
        return self.matvec(x)

    def diagonal(self):
        diag = np.zeros(min(self.shape))
        rows = self._expanded_rows()
        hit = rows == self.indices
        diag_rows = rows[hit]
        keep = diag_rows < len(diag)
        diag[diag_rows[keep]] = self.data[hit][keep]
        return diag

    def transpose(self):
        return assemble_from_triplets(
            (self.shape[1], self.shape[0]),
            self.indices, self._expanded_rows(), self.data)

    def symmetry_gap(self):
        """Largest entry of |K - K^T|; zero for exactly symmetric matrices."""
        if self.shape[0] != self.shape[1]:
            raise ValueError("symmetry gap requires a square matrix")
        rows = self._expanded_rows()
        diff = assemble_from_triplets(
            self.shape,
            np.concatenate([rows, self.indices]),
            np.concatenate([self.indices, rows]),
            np.concatenate([self.data, -self.data]))
        return float(np.abs(diff.data).max()) if diff.nnz else 0.0

    def toarray(self):
        dense = np.zeros(self.shape)
        dense[self._expanded_rows(), self.indices] = self.data
        return dense


def assemble_from_triplets(shape, rows, cols, vals):
    """Build a CSRMatrix from (row, col, value) triplets, summing duplicates.

    Triplets are sorted by (row, col, value) before summation, making the
    result independent of the input order even in floating point.
    """
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=np.float64).ravel()
    if not (len(rows) == len(cols) == len(vals)):
        raise AssemblyError("triplet arrays must have equal length")
    nrows, ncols = int(shape[0]), int(shape[1])
    if len(rows):
        if rows.min() < 0 or rows.max() >= nrows:
            raise AssemblyError("triplet row index out of range")
        if cols.min() < 0 or cols.max() >= ncols:
            raise AssemblyError("triplet column index out of range")
    else:
        return CSRMatrix((nrows, ncols), np.zeros(nrows + 1, dtype=np.int64),
                         np.empty(0, dtype=np.int64), np.empty(0), _validate=False)

    order = np.lexsort((vals, cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    first = np.empty(len(rows), dtype=bool)
    first[0] = True
    first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    starts = np.flatnonzero(first)
    out_vals = np.add.reduceat(vals, starts)
    out_cols = cols[starts]
    counts = np.bincount(rows[starts], minlength=nrows)
    indptr = np.zeros(nrows + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return CSRMatrix((nrows, ncols), indptr, out_cols, out_vals, _validate=False)


def _check_symmetric(mat, tol=1e-10):
    scale = float(np.abs(mat.data).max()) if mat.nnz else 1.0
    gap = mat.symmetry_gap()
    if gap > tol * max(scale, 1e-300):
        raise SolverError(
            f"matrix is not symmetric: max |K - K^T| = {gap:.3e} "
            f"(scale {scale:.3e})")


def cg_solve(mat, rhs, tol=1e-10, maxit=None, x0=None, check_symmetry=True):
    """Jacobi-preconditioned conjugate gradients for SPD systems.

    Stops when the true residual norm drops below tol * ||rhs||; raises
    SolverError (carrying the final residual and iteration count) on
    breakdown or when maxit is exhausted.
    """
    n = mat.shape[0]
    if mat.shape[0] != mat.shape[1]:
        raise SolverError(f"matrix must be square, got {mat.shape}")
    rhs = np.asarray(rhs, dtype=np.float64)
    if check_symmetry:
        _check_symmetric(mat)
    if maxit is None:
        maxit = 10 * max(n, 1)
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros(n)

    diag = mat.diagonal()
    if np.any(diag <= 0.0):
        raise SolverError("matrix has nonpositive diagonal entries; not SPD")
    inv_diag = 1.0 / diag

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    r = rhs - mat.matvec(x)
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    res = float(np.linalg.norm(r))
    ap = np.empty(n)
    for it in range(1, maxit + 1):
        if res <= tol * rhs_norm:
            return x
        mat.matvec(p, out=ap)
        pap = float(p @ ap)
        if pap <= 0.0:
            raise SolverError(
                f"CG breakdown: p^T A p = {pap:.3e} <= 0 at iteration {it}",
                residual=res / rhs_norm, iterations=it)
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        res = float(np.linalg.norm(r))
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    if res <= tol * rhs_norm:
        return x
    raise SolverError(
        f"CG did not converge in {maxit} iterations "
        f"(relative residual {res / rhs_norm:.3e})",
        residual=res / rhs_norm, iterations=maxit)


def nonsym_solve(mat, rhs, tol=1e-10, maxit=None, x0=None):
    """Jacobi-preconditioned BiCGStab for square nonsingular systems.

    Contract is residual-based: returns x with ||rhs - K x|| <= tol * ||rhs||.
    """
    n = mat.shape[0]
    if mat.shape[0] != mat.shape[1]:
        raise SolverError(f"matrix must be square, got {mat.shape}")
    rhs = np.asarray(rhs, dtype=np.float64)
    if maxit is None:
        maxit = 10 * max(n, 1)
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros(n)

    diag = mat.diagonal()
    inv_diag = 1.0 / np.where(diag == 0.0, 1.0, diag)

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    r = rhs - mat.matvec(x)
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros(n)
    p = np.zeros(n)
    res = float(np.linalg.norm(r))
    tiny = 1e-300
    for it in range(1, maxit + 1):
        if res <= tol * rhs_norm:
            return x
        rho_new = float(r_hat @ r)
        if abs(rho_new) < tiny:
            raise SolverError(
                f"BiCGStab breakdown (rho = {rho_new:.3e}) at iteration {it}",
                residual=res / rhs_norm, iterations=it)
        beta = (rho_new / rho) * (alpha / omega)
        p = r + beta * (p - omega * v)
        p_hat = inv_diag * p
        v = mat.matvec(p_hat)
        denom = float(r_hat @ v)
        if abs(denom) < tiny:
            raise SolverError(
                f"BiCGStab breakdown (r_hat . v = {denom:.3e}) at iteration {it}",
                residual=res / rhs_norm, iterations=it)
        alpha = rho_new / denom
        s = r - alpha * v
        if float(np.linalg.norm(s)) <= tol * rhs_norm:
            x = x + alpha * p_hat
            return x
        s_hat = inv_diag * s
        t = mat.matvec(s_hat)
        tt = float(t @ t)
        if tt < tiny:
            raise SolverError(
                f"BiCGStab breakdown (t . t = {tt:.3e}) at iteration {it}",
                residual=res / rhs_norm, iterations=it)
        omega = float(t @ s) / tt
        if abs(omega) < tiny:
            raise SolverError(
                f"BiCGStab breakdown (omega = {omega:.3e}) at iteration {it}",
                residual=res / rhs_norm, iterations=it)
        x = x + alpha * p_hat + omega * s_hat
        r = s - omega * t
        res = float(np.linalg.norm(r))
        rho = rho_new
    if res <= tol * rhs_norm:
        return x
    raise SolverError(
        f"BiCGStab did not converge in {maxit} iterations "
        f"(relative residual {res / rhs_norm:.3e})",
        residual=res / rhs_norm, iterations=maxit)
