# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: Jacobi three-term recurrence and banded mat-vec."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def jacobi_table(Py_ssize_t n, double a, double b, z):
    """Rows P_0 .. P_{n-1} of P^{(a,b)} evaluated at every point of ``z``."""
    cdef cnp.ndarray[double, ndim=1] zz = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef Py_ssize_t m = zz.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((n, m), dtype=np.float64)
    cdef Py_ssize_t i, k
    cdef double c, c1, c2, c3, ab = a + b, amb2 = a * a - b * b
    if n == 0:
        return out
    for i in range(m):
        out[0, i] = 1.0
    if n == 1:
        return out
    for i in range(m):
        out[1, i] = (a + 1.0) + 0.5 * (ab + 2.0) * (zz[i] - 1.0)
    for k in range(2, n):
        c = 2.0 * k + ab
        c1 = 2.0 * k * (k + ab) * (c - 2.0)
        c2 = (c - 1.0) * c * (c - 2.0)
        c3 = (c - 1.0) * amb2
        c = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c
        for i in range(m):
            out[k, i] = ((c2 * zz[i] + c3) * out[k - 1, i] - c * out[k - 2, i]) / c1
    return out


def banded_matvec(offsets, data, x, Py_ssize_t nrows):
    """y = A x for A stored as ``data[j, i] = A[i, i + offsets[j]]``."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=2] d = np.ascontiguousarray(data, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] y = np.zeros(nrows, dtype=np.float64)
    cdef Py_ssize_t ncols = xx.shape[0], j, i, col, lo, hi, o
    for j in range(off.shape[0]):
        o = off[j]
        lo = 0 if o >= 0 else -o
        hi = nrows if nrows < ncols - o else ncols - o
        for i in range(lo, hi):
            y[i] += d[j, i] * xx[i + o]
    return y
