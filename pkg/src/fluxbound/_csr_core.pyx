# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled CSR kernels: row-wise matvec used inside the Krylov solvers."""


def csr_matvec(const long long[::1] indptr, const long long[::1] indices,
               const double[::1] data, const double[::1] x, double[::1] out):
    """out[i] = sum_k data[k] * x[indices[k]] over row i's entries."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        out[i] = acc
