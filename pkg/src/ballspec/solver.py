"""Radial eigenvalue problems: the Dirichlet Laplacian in the ball.

The model problem is f'' + 2f'/r - ell(ell+1)f/r^2 + kappa^2 f = 0 with
f(1) = 0, whose smallest root kappa is the first zero of the spherical
Bessel function j_ell. Three discretizations are provided: tau-closed
Jacobi systems, a boundary-recombined Galerkin system, and a sparse
Chebyshev (ultraspherical) system in z = 2r^2 - 1.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .radial import (
    BandedOperator,
    RadialBasisId,
    build_C,
    build_Dminus,
    build_Dplus,
    build_R,
    restriction_row,
)

__all__ = [
    "TauVariant",
    "AssembledSystem",
    "GalerkinSystem",
    "ChebyshevSystem",
    "SolverError",
    "SweepRow",
    "METHODS",
    "PUBLISHED_ROOTS",
    "assemble_bessel_tau",
    "assemble_bessel_galerkin",
    "assemble_bessel_chebyshev",
    "assemble_method",
    "solve_smallest_kappa",
    "reference_kappa",
    "error_sweep",
]

# first zeros of j_2 and j_64, quoted to 17 digits
PUBLISHED_ROOTS = {2: 5.7634591968945498, 64: 72.199780933233055}


class SolverError(RuntimeError):
    """Raised when an eigenproblem yields too few admissible roots."""


class TauVariant(str, Enum):
    LAST_ROW_DROP = "last_row_drop"
    CONVERT_COLUMN = "convert_column"
    JONES_WORLAND = "jones_worland"


def _check_common(alpha, ell, N):
    if not alpha > -1:
        raise ValueError(f"alpha must exceed -1, got {alpha}")
    if int(ell) != ell or ell < 0:
        raise ValueError(f"ell must be a non-negative integer, got {ell}")
    if int(N) != N or N < 4:
        raise ValueError(f"N must be an integer >= 4, got {N}")


@dataclass(frozen=True)
class AssembledSystem:
    """Block system [[L, tau], [boundary, 0]] x = -kappa^2 [[M, 0], [0, 0]] x."""

    alpha: float
    ell: int
    N: int
    variant: TauVariant
    operator: BandedOperator
    mass: BandedOperator
    tau_column: np.ndarray
    boundary_row: np.ndarray

    @property
    def size(self):
        return self.N + 1

    def matrices(self):
        N = self.N
        A = np.zeros((N + 1, N + 1))
        B = np.zeros((N + 1, N + 1))
        A[:N, :N] = self.operator.toarray()
        A[:N, N] = self.tau_column
        A[N, :N] = self.boundary_row
        B[:N, :N] = -self.mass.toarray()
        return A, B


def _last_unit(N):
    e = np.zeros(N)
    e[-1] = 1.0
    return e


def assemble_bessel_tau(alpha, ell, N, variant=TauVariant.CONVERT_COLUMN):
    _check_common(alpha, ell, N)
    variant = TauVariant(variant)
    alpha, ell, N = float(alpha), int(ell), int(N)
    basis = RadialBasisId(alpha, ell)
    L = build_Dminus(basis.shifted(1, 1), N) @ build_Dplus(basis, N)
    M = build_C(basis.shifted(1, 0), N) @ build_C(basis, N)
    e = _last_unit(N)
    if variant is TauVariant.LAST_ROW_DROP:
        tau = e
    elif variant is TauVariant.CONVERT_COLUMN:
        tau = M.apply(e)
    else:
        if alpha != -0.5:
            raise ValueError("the Jones-Worland column needs alpha = -1/2")
        if ell < 1:
            raise ValueError("the Jones-Worland column needs ell >= 1")
        tau = M.apply(build_R((alpha, ell - 1), N).apply(e))
    return AssembledSystem(alpha, ell, N, variant, L, M, np.asarray(tau, dtype=float), restriction_row(basis, N))


@dataclass(frozen=True)
class GalerkinSystem:
    """Square system after recombining the trial functions by C^T.

    ``recombination`` is the N x (N-1) map from Dirichlet-basis coefficients
    to (alpha, ell) coefficients; the last equation is dropped.
    """

    alpha: float
    ell: int
    N: int
    recombination: np.ndarray
    stiffness: np.ndarray
    mass: np.ndarray

    @property
    def size(self):
        return self.N - 1

    def matrices(self):
        return self.stiffness, -self.mass


def assemble_bessel_galerkin(alpha, ell, N):
    _check_common(alpha, ell, N)
    alpha, ell, N = float(alpha), int(ell), int(N)
    basis = RadialBasisId(alpha, ell)
    L = build_Dminus(basis.shifted(1, 1), N) @ build_Dplus(basis, N)
    M = build_C(basis.shifted(1, 0), N) @ build_C(basis, N)
    # C maps (alpha, ell) -> (alpha+1, ell); its transpose multiplies by (1 - r^2)
    W = build_C(basis, N).toarray()[: N - 1, :].T
    return GalerkinSystem(alpha, ell, N, W, (L.toarray() @ W)[: N - 1], (M.toarray() @ W)[: N - 1])


# Ultraspherical pieces. T: first kind, U: second kind, C2: C^{(2)}.


def _diag_matrix(n, bands):
    return sp.diags([v for v in bands.values()], list(bands.keys()), shape=(n, n), format="csr")


def _t_to_u(n):
    d0 = np.full(n, 0.5)
    d0[0] = 1.0
    return _diag_matrix(n, {0: d0, 2: np.full(n - 2, -0.5)})


def _u_to_c2(n):
    k = np.arange(n, dtype=float)
    return _diag_matrix(n, {0: 1.0 / (k + 1), 2: -1.0 / (k[2:] + 1)})


def _d1(n):
    # T_k' = k U_{k-1}
    return _diag_matrix(n, {1: np.arange(1, n, dtype=float)})


def _d2(n):
    # T_k'' = 2k C2_{k-2}
    return _diag_matrix(n, {2: 2.0 * np.arange(2, n, dtype=float)})


def _mulz(n, lam):
    """Multiplication by z in the C^{(lam)} basis (lam = 0 means T)."""
    k = np.arange(n, dtype=float)
    if lam == 0:
        sub = np.full(n - 1, 0.5)
        sup = np.full(n - 1, 0.5)
        sub[0] = 1.0
        return _diag_matrix(n, {-1: sub, 1: sup})
    # z C_k = ((k+1) C_{k+1} + (k+2lam-1) C_{k-1}) / (2(k+lam))
    sub = (k[:-1] + 1) / (2 * (k[:-1] + lam))
    sup = (k[1:] + 2 * lam - 1) / (2 * (k[1:] + lam))
    return _diag_matrix(n, {-1: sub, 1: sup})


@dataclass(frozen=True)
class ChebyshevSystem:
    """Ultraspherical discretization with a dense boundary row appended.

    Unknowns are T-coefficients of g in f = r^gamma g(2r^2 - 1).
    """

    ell: int
    N: int
    gamma: int
    operator: sp.csr_matrix
    mass: sp.csr_matrix
    boundary_row: np.ndarray

    @property
    def size(self):
        return self.N

    def bandwidth(self):
        coo = self.operator.tocoo()
        offsets = set((coo.col - coo.row)[coo.data != 0]) | set(
            (self.mass.tocoo().col - self.mass.tocoo().row)[self.mass.tocoo().data != 0]
        )
        return len(offsets)

    def matrices(self):
        A = np.vstack([self.operator.toarray(), self.boundary_row])
        B = np.vstack([-self.mass.toarray(), np.zeros(self.N)])
        return A, B


def assemble_bessel_chebyshev(ell, N):
    """4(1+z)^2 g'' + (6+4gamma)(1+z) g' + (gamma^2+gamma-ell(ell+1)) g + kappa^2 (1+z)/2 g = 0."""
    _check_common(0.0, ell, N)
    ell, N = int(ell), int(N)
    gamma = ell % 2
    n = N + 4  # pad so that truncation does not touch the kept rows
    eye = sp.identity(n, format="csr")
    S0, S1 = _t_to_u(n), _u_to_c2(n)
    onez_t = eye + _mulz(n, 0)
    onez_u = eye + _mulz(n, 1)
    onez_c2 = eye + _mulz(n, 2)
    A = (
        4.0 * (onez_c2 @ onez_c2 @ _d2(n))
        + (6.0 + 4.0 * gamma) * (S1 @ onez_u @ _d1(n))
        + float(gamma * gamma + gamma - ell * (ell + 1)) * (S1 @ S0)
    )
    B = 0.5 * (S1 @ S0 @ onez_t)
    A = sp.csr_matrix(A[: N - 1, :N])
    B = sp.csr_matrix(B[: N - 1, :N])
    A.eliminate_zeros()
    B.eliminate_zeros()
    return ChebyshevSystem(ell, N, gamma, A, B, np.ones(N))


METHODS = ("tau_alpha0", "jones_worland", "chebyshev", "galerkin")


def assemble_method(method, ell, N):
    """Build the system a named sweep method uses; returns (system, alpha, tau_variant)."""
    if method == "tau_alpha0":
        return assemble_bessel_tau(0.0, ell, N, TauVariant.CONVERT_COLUMN), 0.0, TauVariant.CONVERT_COLUMN.value
    if method == "jones_worland":
        return assemble_bessel_tau(-0.5, ell, N, TauVariant.JONES_WORLAND), -0.5, TauVariant.JONES_WORLAND.value
    if method == "chebyshev":
        return assemble_bessel_chebyshev(ell, N), float("nan"), ""
    if method == "galerkin":
        return assemble_bessel_galerkin(0.0, ell, N), 0.0, ""
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def _equilibrate(A, B):
    scale = np.max(np.abs(A), axis=1)
    scale[scale == 0] = 1.0
    return A / scale[:, None], B / scale[:, None]


def solve_smallest_kappa(system, count=1, scale=False, imag_tol=1e-10):
    """The ``count`` smallest positive kappa, ascending.

    Eigenvalues of A x = kappa^2 B x are kept if finite, positive and real
    up to ``imag_tol`` relative. ``scale`` divides each row by its largest
    stiffness entry, which leaves the spectrum unchanged.
    """
    if count < 1:
        raise ValueError("count must be positive")
    A, B = system.matrices()
    if scale:
        A, B = _equilibrate(A, B)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = sla.eig(A, B, right=False)
    finite = w[np.isfinite(w)]
    ok = finite[(np.abs(finite.imag) <= imag_tol * np.abs(finite)) & (finite.real > 0)].real
    if ok.size < count:
        raise SolverError(
            f"found {ok.size} admissible eigenvalues, wanted {count}: "
            f"{w.size} total, {finite.size} finite, "
            f"largest imaginary ratio {np.max(np.abs(finite.imag) / np.maximum(np.abs(finite), 1e-300), initial=0.0):.3e}"
        )
    return list(np.sqrt(np.sort(ok))[:count])


def reference_kappa(ell, max_N=64):
    """Reference root: published values, pi for ell = 0, else a solve at 2 * max_N.

    Returns (value, source).
    """
    if ell in PUBLISHED_ROOTS:
        return PUBLISHED_ROOTS[ell], "published"
    if ell == 0:
        return float(np.pi), "analytic"
    N = max(2 * int(max_N), 32)
    return float(solve_smallest_kappa(assemble_bessel_tau(0.0, ell, N))[0]), f"self:N={N}"


@dataclass(frozen=True)
class SweepRow:
    method: str
    alpha: float
    ell: int
    N: int
    tau_variant: str
    kappa_est: float
    kappa_ref: float
    rel_error: float
    wall_time_ms: float

    FIELDS = ("method", "alpha", "ell", "N", "tau_variant", "kappa_est", "kappa_ref", "rel_error", "wall_time_ms")

    def as_list(self, timing=True):
        t = repr(self.wall_time_ms) if timing else ""
        return [self.method, repr(self.alpha), self.ell, self.N, self.tau_variant,
                repr(self.kappa_est), repr(self.kappa_ref), repr(self.rel_error), t]


def _sweep_cell(args):
    method, ell, N, ref = args
    t0 = time.perf_counter()
    system, alpha, variant = assemble_method(method, ell, N)
    try:
        k = float(solve_smallest_kappa(system)[0])
    except SolverError:
        k = float("nan")
    ms = 1e3 * (time.perf_counter() - t0)
    return SweepRow(method, alpha, int(ell), int(N), variant, k, ref, abs(k - ref) / ref, ms)


def error_sweep(methods, ells, Ns, references=None, jobs=1):
    """Relative errors of kappa_0 for every (method, ell, N) cell.

    Rows are ordered method-major, then ell, then N, independent of ``jobs``.
    ``references`` maps ell to a reference value; missing entries come from
    ``reference_kappa`` with the largest swept N.
    """
    methods, ells, Ns = list(methods), [int(x) for x in ells], [int(x) for x in Ns]
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    refs = dict(references or {})
    for ell in ells:
        if ell not in refs:
            refs[ell] = reference_kappa(ell, max(Ns))[0]
    cells = [(m, ell, N, refs[ell]) for m in methods for ell in ells for N in Ns]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_cell, cells, chunksize=max(1, len(cells) // (4 * jobs))))
    return [_sweep_cell(c) for c in cells]
