"""Radial basis on [0, 1]: the functions

    Q_n^{alpha,ell}(r) = norm(n) * r^ell * P_n^{(alpha, ell+1/2)}(2 r^2 - 1),

orthonormal under (1 - r^2)^alpha r^2 dr, together with their sparse
operators and quadrature transforms.
"""

from dataclasses import dataclass, field
from math import ceil

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

from .jacobi import gauss_jacobi
from .kernels import banded_matvec, jacobi_table

__all__ = [
    "RadialBasisId",
    "RadialCoeffs",
    "BandedOperator",
    "RadialGrid",
    "q_norm",
    "eval_Q",
    "q_table",
    "build_Dplus",
    "build_Dminus",
    "build_C",
    "build_R",
    "identity_operator",
    "restriction_row",
    "conv_diag",
    "conv_super",
    "rmul_diag",
    "rmul_super",
    "radial_grid",
    "transform_forward",
    "transform_backward",
]


@dataclass(frozen=True, order=True)
class RadialBasisId:
    """Label (alpha, ell) of the weighted radial family."""

    alpha: float
    ell: int

    def __post_init__(self):
        if not self.alpha > -1:
            raise ValueError(f"alpha must exceed -1, got {self.alpha}")
        if int(self.ell) != self.ell or self.ell < 0:
            raise ValueError(f"ell must be a non-negative integer, got {self.ell}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "ell", int(self.ell))

    def shifted(self, dalpha=0, dell=0):
        return RadialBasisId(self.alpha + dalpha, self.ell + dell)

    def __str__(self):
        return f"(alpha={self.alpha:g}, ell={self.ell})"


def _as_basis(basis):
    return basis if isinstance(basis, RadialBasisId) else RadialBasisId(*basis)


@dataclass
class RadialCoeffs:
    """Coefficient vector (real or complex) tied to the basis it is expanded in."""

    basis: RadialBasisId
    coeffs: np.ndarray

    def __post_init__(self):
        self.basis = _as_basis(self.basis)
        self.coeffs = np.asarray(self.coeffs)

    def __len__(self):
        return self.coeffs.size

    def evaluate(self, r):
        return transform_backward(self, r)


@dataclass(frozen=True, eq=False)
class BandedOperator:
    """Sparse matrix stored by diagonals, ``data[j, i] = A[i, i + offsets[j]]``.

    The operator maps coefficients in ``in_basis`` to coefficients in
    ``out_basis``. Bases may be ``None`` for operators that are not tied to
    a single radial family (e.g. the Chebyshev reference solver).
    """

    in_basis: RadialBasisId
    out_basis: RadialBasisId
    shape: tuple
    offsets: tuple
    data: np.ndarray = field(repr=False)

    @classmethod
    def from_bands(cls, in_basis, out_basis, shape, bands):
        """Build from ``{offset: values}`` where values run along output rows."""
        rows, cols = shape
        offsets = tuple(sorted(bands))
        data = np.zeros((len(offsets), rows))
        for j, o in enumerate(offsets):
            vals = np.asarray(bands[o], dtype=float)
            lo, hi = max(0, -o), min(rows, cols - o)
            data[j, lo:hi] = vals[: hi - lo] if vals.size >= hi - lo else np.pad(vals, (0, hi - lo - vals.size))
        return cls(in_basis, out_basis, (rows, cols), offsets, data)

    @classmethod
    def from_matrix(cls, matrix, in_basis=None, out_basis=None, tol=0.0):
        """Extract the nonzero diagonals of a dense or sparse matrix."""
        A = sp.csr_matrix(matrix)
        A.data[np.abs(A.data) <= tol] = 0.0
        A.eliminate_zeros()
        coo = A.tocoo()
        offsets = sorted(set((coo.col - coo.row).tolist()))
        data = np.zeros((len(offsets), A.shape[0]))
        pos = {o: j for j, o in enumerate(offsets)}
        for i, c, v in zip(coo.row, coo.col, coo.data):
            data[pos[c - i], i] = v
        return cls(in_basis, out_basis, A.shape, tuple(offsets), data)

    @property
    def bands(self):
        """Mapping offset -> the stored (in-range) entries of that diagonal."""
        rows, cols = self.shape
        out = {}
        for j, o in enumerate(self.offsets):
            lo, hi = max(0, -o), min(rows, cols - o)
            out[o] = self.data[j, lo:hi].copy()
        return out

    @property
    def nbands(self):
        return sum(1 for v in self.bands.values() if np.any(v != 0))

    def to_sparse(self):
        rows, cols = self.shape
        r, c, v = [], [], []
        for o, vals in self.bands.items():
            lo = max(0, -o)
            idx = np.arange(lo, lo + vals.size)
            keep = vals != 0
            r.append(idx[keep])
            c.append(idx[keep] + o)
            v.append(vals[keep])
        if not r:
            return sp.csr_matrix(self.shape)
        return sp.csr_matrix((np.concatenate(v), (np.concatenate(r), np.concatenate(c))), shape=self.shape)

    def toarray(self):
        return self.to_sparse().toarray()

    @property
    def T(self):
        """Transpose, with the basis labels swapped."""
        return BandedOperator.from_matrix(self.to_sparse().T, self.out_basis, self.in_basis)

    def apply(self, x):
        """Act on a coefficient vector (or a RadialCoeffs, checking its basis)."""
        if isinstance(x, RadialCoeffs):
            if self.in_basis is not None and x.basis != self.in_basis:
                raise ValueError(f"operator expects basis {self.in_basis}, got {x.basis}")
            return RadialCoeffs(self.out_basis, self.apply(x.coeffs))
        x = np.asarray(x)
        if x.shape[0] != self.shape[1]:
            raise ValueError(f"length {x.shape[0]} does not match operator columns {self.shape[1]}")
        if x.ndim > 1:
            return self.to_sparse() @ x
        off = np.asarray(self.offsets, dtype=np.int64)
        if np.iscomplexobj(x):
            re = banded_matvec(off, self.data, np.ascontiguousarray(x.real), self.shape[0])
            im = banded_matvec(off, self.data, np.ascontiguousarray(x.imag), self.shape[0])
            return re + 1j * im
        return banded_matvec(off, self.data, np.ascontiguousarray(x, dtype=float), self.shape[0])

    def __matmul__(self, other):
        if isinstance(other, BandedOperator):
            if self.in_basis is not None and other.out_basis is not None and self.in_basis != other.out_basis:
                raise ValueError(f"cannot compose: {other.out_basis} feeds an operator expecting {self.in_basis}")
            return BandedOperator.from_matrix(self.to_sparse() @ other.to_sparse(), other.in_basis, self.out_basis)
        return self.apply(other)

    def _combine(self, other, sign):
        if (self.in_basis, self.out_basis) != (other.in_basis, other.out_basis) or self.shape != other.shape:
            raise ValueError("operators act between different bases")
        return BandedOperator.from_matrix(self.to_sparse() + sign * other.to_sparse(), self.in_basis, self.out_basis)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scalar):
        return BandedOperator(self.in_basis, self.out_basis, self.shape, self.offsets, self.data * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


# Coefficients of the conversion and r-multiplication operators.


def conv_diag(n, alpha, ell):
    n = np.asarray(n, dtype=float)
    return np.sqrt(
        (n + alpha + 1) * (n + alpha + ell + 1.5) / ((2 * n + alpha + ell + 1.5) * (2 * n + alpha + ell + 2.5))
    )


def conv_super(n, alpha, ell):
    n = np.asarray(n, dtype=float)
    return -np.sqrt((n + 1) * (n + ell + 1.5) / ((2 * n + alpha + ell + 2.5) * (2 * n + alpha + ell + 3.5)))


def rmul_diag(n, alpha, ell):
    n = np.asarray(n, dtype=float)
    return np.sqrt(
        (n + ell + 1.5) * (n + alpha + ell + 1.5) / ((2 * n + alpha + ell + 1.5) * (2 * n + alpha + ell + 2.5))
    )


def rmul_super(n, alpha, ell):
    n = np.asarray(n, dtype=float)
    return np.sqrt((n + 1) * (n + alpha + 1) / ((2 * n + alpha + ell + 2.5) * (2 * n + alpha + ell + 3.5)))


def _check_size(N):
    if int(N) != N or N < 1:
        raise ValueError(f"truncation N must be a positive integer, got {N}")
    return int(N)


def build_Dplus(basis, N):
    """d/dr - ell/r : (alpha, ell) -> (alpha+1, ell+1), one superdiagonal."""
    b = _as_basis(basis)
    N = _check_size(N)
    n = np.arange(1, N, dtype=float)
    vals = np.sqrt(2 * n * (2 * n + 2 * b.alpha + 2 * b.ell + 3))
    return BandedOperator.from_bands(b, b.shifted(1, 1), (N, N), {1: vals})


def build_Dminus(basis, N):
    """d/dr + (ell+1)/r : (alpha, ell) -> (alpha+1, ell-1), diagonal."""
    b = _as_basis(basis)
    N = _check_size(N)
    if b.ell == 0:
        raise ValueError("lowering operator is undefined at ell = 0")
    n = np.arange(N, dtype=float)
    vals = np.sqrt(2 * (n + b.alpha + 1) * (2 * n + 2 * b.ell + 1))
    return BandedOperator.from_bands(b, b.shifted(1, -1), (N, N), {0: vals})


def build_C(basis, N):
    """Identity map on functions, re-expressed from (alpha, ell) to (alpha+1, ell)."""
    b = _as_basis(basis)
    N = _check_size(N)
    n = np.arange(N, dtype=float)
    bands = {0: conv_diag(n, b.alpha, b.ell), 1: conv_super(n[:-1], b.alpha, b.ell)}
    return BandedOperator.from_bands(b, b.shifted(1, 0), (N, N), bands)


def build_R(basis, N):
    """Multiplication by r : (alpha, ell) -> (alpha, ell+1)."""
    b = _as_basis(basis)
    N = _check_size(N)
    n = np.arange(N, dtype=float)
    bands = {0: rmul_diag(n, b.alpha, b.ell), 1: rmul_super(n[:-1], b.alpha, b.ell)}
    return BandedOperator.from_bands(b, b.shifted(0, 1), (N, N), bands)


def identity_operator(basis, N):
    b = _as_basis(basis)
    return BandedOperator.from_bands(b, b, (N, N), {0: np.ones(N)})


def q_norm(n, basis):
    """Normalisation making Q_n unit-norm under (1 - r^2)^alpha r^2 dr."""
    b = _as_basis(basis)
    n = np.asarray(n, dtype=float)
    a, l = b.alpha, b.ell
    log_ratio = gammaln(n + a + l + 1.5) + gammaln(n + 1) - gammaln(n + l + 1.5) - gammaln(n + a + 1)
    return np.sqrt(2 * (2 * n + a + l + 1.5) * np.exp(log_ratio))


def q_table(N, basis, r, strip_power=0):
    """Rows Q_0 .. Q_{N-1} sampled at ``r``, each divided by r^strip_power."""
    b = _as_basis(basis)
    r = np.asarray(r, dtype=float).ravel()
    if np.any(r < 0) or np.any(r > 1 + 1e-14):
        raise ValueError("radius outside [0, 1]")
    P = jacobi_table(N, b.alpha, b.ell + 0.5, 2 * r * r - 1)
    return q_norm(np.arange(N), b)[:, None] * P * r ** (b.ell - strip_power)


def eval_Q(n, basis, r):
    """Q_n^{alpha,ell}(r); ``r`` may be scalar or array."""
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a non-negative integer, got {n}")
    shape = np.shape(r)
    return q_table(int(n) + 1, basis, r)[-1].reshape(shape)[()]


def restriction_row(basis, N):
    """Values Q_n(1), n < N, from the closed form (log-gamma, no recurrence)."""
    b = _as_basis(basis)
    n = np.arange(N, dtype=float)
    a, l = b.alpha, b.ell
    log_prod = (
        gammaln(n + a + l + 1.5)
        - gammaln(n + l + 1.5)
        + gammaln(n + a + 1)
        - gammaln(n + 1)
        - 2 * gammaln(a + 1)
    )
    return np.sqrt(2 * (2 * n + a + l + 1.5) * np.exp(log_prod))


@dataclass(frozen=True)
class RadialGrid:
    """Gauss nodes in r for the measure (1 - r^2)^alpha r^2 dr.

    The rule is exact for sums of ``weights * r^(2 ell) * p(r^2)`` with
    deg p < 2 * size, where ``ell`` is the grid's own power.
    """

    alpha: float
    ell: int
    r: np.ndarray
    weights: np.ndarray

    @property
    def size(self):
        return self.r.size

    def required_size(self, basis, N):
        """Smallest grid size giving exact projections for a degree-N expansion."""
        b = _as_basis(basis)
        extra = b.ell - self.ell
        return N + max(0, ceil((extra - 1) / 2))


def radial_grid(alpha, size, ell=0):
    """Gauss rule in z = 2r^2 - 1 with parameters (alpha, ell + 1/2)."""
    rule = gauss_jacobi(size, (alpha, ell + 0.5))
    r = np.sqrt((1 + rule.nodes) / 2)
    w = rule.weights * 2.0 ** (-alpha - ell - 2.5)
    return RadialGrid(float(alpha), int(ell), r, w)


def _check_grid(grid, basis, N):
    if grid.alpha != basis.alpha:
        raise ValueError(f"grid weight alpha={grid.alpha} does not match basis alpha={basis.alpha}")
    if basis.ell < grid.ell or (basis.ell - grid.ell) % 2 and grid.ell:
        raise ValueError(f"grid built for ell={grid.ell} cannot project onto {basis}")
    need = grid.required_size(basis, N)
    if grid.size < need:
        raise ValueError(f"grid of {grid.size} nodes is too small; need at least {need}")


def transform_forward(samples, basis, N, grid=None):
    """Project samples at the grid nodes onto Q_0 .. Q_{N-1}.

    ``samples`` may carry extra trailing axes. Without ``grid`` the default
    Gauss grid for ``basis`` with N nodes is assumed.
    """
    b = _as_basis(basis)
    N = _check_size(N)
    if grid is None:
        grid = radial_grid(b.alpha, N, b.ell)
    _check_grid(grid, b, N)
    samples = np.asarray(samples)
    if samples.shape[0] != grid.size:
        raise ValueError(f"expected {grid.size} samples, got {samples.shape[0]}")
    p = grid.ell
    Q = q_table(N, b, grid.r, strip_power=p)
    f = samples / (grid.r ** p).reshape((-1,) + (1,) * (samples.ndim - 1))
    coeffs = np.tensordot(Q * grid.weights, f, axes=(1, 0))
    if coeffs.ndim == 1:
        return RadialCoeffs(b, coeffs)
    return coeffs


def transform_backward(coeffs, r, basis=None):
    """Evaluate an expansion at radii ``r`` (a RadialGrid or array)."""
    if isinstance(coeffs, RadialCoeffs):
        basis, coeffs = coeffs.basis, coeffs.coeffs
    if basis is None:
        raise ValueError("basis required for a bare coefficient array")
    if isinstance(r, RadialGrid):
        r = r.r
    coeffs = np.asarray(coeffs)
    Q = q_table(coeffs.shape[0], basis, r)
    return np.tensordot(Q, coeffs, axes=(0, 0))
