"""Pure-Python versions of the compiled kernels (same signatures)."""

import numpy as np


def jacobi_table(n, a, b, z):
    """Rows P_0 .. P_{n-1} of P^{(a,b)} evaluated at every point of ``z``."""
    z = np.asarray(z, dtype=np.float64).ravel()
    out = np.empty((n, z.size))
    if n == 0:
        return out
    out[0] = 1.0
    if n == 1:
        return out
    ab = a + b
    out[1] = (a + 1.0) + 0.5 * (ab + 2.0) * (z - 1.0)
    for k in range(2, n):
        c = 2.0 * k + ab
        c1 = 2.0 * k * (k + ab) * (c - 2.0)
        c2 = (c - 1.0) * c * (c - 2.0)
        c3 = (c - 1.0) * (a * a - b * b)
        c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c
        out[k] = ((c2 * z + c3) * out[k - 1] - c4 * out[k - 2]) / c1
    return out


def banded_matvec(offsets, data, x, nrows):
    """y = A x for A stored as ``data[j, i] = A[i, i + offsets[j]]``."""
    x = np.asarray(x, dtype=np.float64)
    ncols = x.size
    y = np.zeros(nrows)
    for j, o in enumerate(offsets):
        lo = max(0, -o)
        hi = min(nrows, ncols - o)
        if hi > lo:
            y[lo:hi] += data[j, lo:hi] * x[lo + o:hi + o]
    return y
