"""Spin-weighted spherical harmonics, their derivative wavenumbers, the
cos/sin multiplication operators, and per-(m, s) quadrature transforms.

Angular operators are indexed by ell = 0 .. Lmax for every (m, s); rows and
columns below ell0 = max(|m|, |s|) are identically zero.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

from .jacobi import gauss_jacobi
from .kernels import jacobi_table

__all__ = [
    "SWHIndex",
    "AngularOperator",
    "SphereGrid",
    "ell_min",
    "ys_normalization",
    "ys_theta_table",
    "eval_Ys",
    "k_wavenumber",
    "build_cos_op",
    "build_sin_op",
    "sphere_grid",
    "swsh_forward",
    "swsh_backward",
    "fourier_forward",
    "fourier_backward",
]


def ell_min(m, s):
    return max(abs(m), abs(s))


@dataclass(frozen=True)
class SWHIndex:
    ell: int
    m: int
    s: int

    def __post_init__(self):
        if self.ell < ell_min(self.m, self.s):
            raise ValueError(f"ell={self.ell} below max(|m|, |s|) = {ell_min(self.m, self.s)}")


def ys_normalization(ell, m, s):
    """Signed constant making the theta part unit-norm under sin(theta) d(theta)."""
    l0, l1 = ell_min(m, s), min(abs(m), abs(s))
    ell = np.asarray(ell, dtype=float)
    logv = gammaln(ell + l0 + 1) + gammaln(ell - l0 + 1) - gammaln(ell + l1 + 1) - gammaln(ell - l1 + 1)
    sign = -1.0 if max(m, -s) % 2 else 1.0
    return sign * np.sqrt((2 * ell + 1) / 2 * np.exp(logv))


def ys_theta_table(m, s, Lmax, theta=None, cos_theta=None):
    """Theta parts of Y^s_{ell,m} for ell = 0 .. Lmax (rows), zero below ell0."""
    if cos_theta is None:
        cos_theta = np.cos(np.asarray(theta, dtype=float))
    x = np.asarray(cos_theta, dtype=float).ravel()
    l0 = ell_min(m, s)
    out = np.zeros((Lmax + 1, x.size))
    if Lmax < l0:
        return out
    a, b = abs(m + s), abs(m - s)
    half_sin = np.sqrt(np.clip((1 - x) / 2, 0, None))
    half_cos = np.sqrt(np.clip((1 + x) / 2, 0, None))
    P = jacobi_table(Lmax - l0 + 1, a, b, x)
    ells = np.arange(l0, Lmax + 1)
    out[l0:] = ys_normalization(ells, m, s)[:, None] * P * (half_sin**a * half_cos**b)
    return out


def eval_Ys(ell, m, s, theta, phi):
    """Y^s_{ell,m}(theta, phi), unit-norm over the full sphere."""
    SWHIndex(ell, m, s)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > np.pi):
        raise ValueError("theta outside [0, pi]")
    theta, phi = np.broadcast_arrays(theta, np.asarray(phi, dtype=float))
    th = ys_theta_table(m, s, ell, theta=theta)[ell].reshape(theta.shape)
    return (th * np.exp(1j * m * phi) / np.sqrt(2 * np.pi))[()]


def k_wavenumber(mu, ell, s):
    """Eigenvalue of the spin-raising (mu=+1) or lowering (mu=-1) derivative.

    Zero when the shifted harmonic does not exist.
    """
    if mu not in (-1, 1):
        raise ValueError(f"mu must be +1 or -1, got {mu}")
    v = (ell - mu * s) * (ell + mu * s + 1) / 2
    return float(-mu * np.sqrt(v)) if v > 0 else 0.0


# Multiplication coefficients. Factors m/ell and ms/ell cancel explicitly
# when m = 0 so that ell = 0 entries are finite.


def _cos_diag(ell, m, s):
    if m * s == 0:
        return 0.0
    return -m * s / (ell * (ell + 1))


def _cos_off(ell, m, s):
    if ell <= 0:
        return 0.0
    v = (ell - m) * (ell + m) * (ell - s) * (ell + s) / ((2 * ell - 1) * (2 * ell + 1))
    return np.sqrt(v) / ell if v > 0 else 0.0


def _sin_mid(ell, m, s):
    if m == 0:
        return 0.0
    v = (ell - s) * (ell + s + 1)
    return m * np.sqrt(v) / (ell * (ell + 1)) if v > 0 else 0.0


def _sin_off(ell, m, s):
    if ell <= 0:
        return 0.0
    v = (ell - m) * (ell + m) * (ell - s - 1) * (ell - s) / ((2 * ell - 1) * (2 * ell + 1))
    return np.sqrt(v) / ell if v > 0 else 0.0


@dataclass(frozen=True)
class AngularOperator:
    """Multiplication operator on ell-indexed coefficients at fixed m.

    Column ell holds the expansion of (multiplier * Y^{in_spin}_{ell,m}) in
    the Y^{out_spin}_{.,m}, so it acts on coefficient vectors from the left.
    """

    in_spin: int
    out_spin: int
    m: int
    Lmax: int
    matrix: sp.csr_matrix

    def toarray(self):
        return self.matrix.toarray()

    def interior(self, Lcut=None):
        """Dense block with ell <= Lcut (default Lmax - 1)."""
        Lcut = self.Lmax - 1 if Lcut is None else Lcut
        return self.toarray()[: Lcut + 1, : Lcut + 1]

    @property
    def T(self):
        return AngularOperator(self.out_spin, self.in_spin, self.m, self.Lmax, self.matrix.T.tocsr())

    def __matmul__(self, other):
        if isinstance(other, AngularOperator):
            if other.out_spin != self.in_spin or other.m != self.m:
                raise ValueError("spin or m mismatch in composition")
            return AngularOperator(other.in_spin, self.out_spin, self.m, self.Lmax, (self.matrix @ other.matrix).tocsr())
        return self.matrix @ other


def _assemble(entries, in_spin, out_spin, m, Lmax):
    lo_in, lo_out = ell_min(m, in_spin), ell_min(m, out_spin)
    rows, cols, vals = [], [], []
    for (r, c), v in entries.items():
        if 0 <= r <= Lmax and lo_in <= c <= Lmax and r >= lo_out and v != 0:
            rows.append(r)
            cols.append(c)
            vals.append(v)
    M = sp.csr_matrix((vals, (rows, cols)), shape=(Lmax + 1, Lmax + 1))
    return AngularOperator(in_spin, out_spin, m, Lmax, M)


def build_cos_op(s, m, Lmax):
    """cos(theta) multiplication; symmetric tridiagonal, spin preserved."""
    if Lmax < ell_min(m, s):
        raise ValueError("Lmax below ell0")
    e = {}
    for ell in range(ell_min(m, s), Lmax + 1):
        e[(ell + 1, ell)] = _cos_off(ell + 1, m, s)
        e[(ell, ell)] = _cos_diag(ell, m, s)
        e[(ell - 1, ell)] = _cos_off(ell, m, s)
    return _assemble(e, s, s, m, Lmax)


def build_sin_op(s, m, Lmax, direction):
    """sin(theta) multiplication from spin s to spin s + direction."""
    if direction not in (-1, 1):
        raise ValueError("direction must be +1 or -1")
    if Lmax < ell_min(m, s):
        raise ValueError("Lmax below ell0")
    e = {}
    for ell in range(ell_min(m, s), Lmax + 1):
        if direction == 1:
            e[(ell + 1, ell)] = _sin_off(ell + 1, m, -s - 1)
            e[(ell, ell)] = _sin_mid(ell, m, s)
            e[(ell - 1, ell)] = -_sin_off(ell, m, s)
        else:
            e[(ell + 1, ell)] = -_sin_off(ell + 1, m, s - 1)
            e[(ell, ell)] = _sin_mid(ell, m, s - 1)
            e[(ell - 1, ell)] = _sin_off(ell, m, -s)
    return _assemble(e, s, s + direction, m, Lmax)


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre nodes in cos(theta) times a uniform phi grid."""

    cos_theta: np.ndarray
    weights: np.ndarray
    phi: np.ndarray

    @property
    def theta(self):
        return np.arccos(self.cos_theta)

    @property
    def n_theta(self):
        return self.cos_theta.size

    @property
    def n_phi(self):
        return self.phi.size


def sphere_grid(Lmax, n_theta=None, n_phi=None):
    n_theta = Lmax + 1 if n_theta is None else n_theta
    n_phi = 2 * Lmax + 1 if n_phi is None else n_phi
    rule = gauss_jacobi(n_theta, (0.0, 0.0))
    # theta increasing means cos(theta) decreasing
    return SphereGrid(rule.nodes[::-1].copy(), rule.weights[::-1].copy(), 2 * np.pi * np.arange(n_phi) / n_phi)


def _check_theta(grid, Lmax):
    if grid.n_theta < Lmax + 1:
        raise ValueError(f"{grid.n_theta} theta nodes cannot resolve Lmax={Lmax}; need {Lmax + 1}")


def swsh_forward(samples, m, s, Lmax, grid):
    """Theta samples (leading axis) -> coefficients for ell = 0 .. Lmax."""
    _check_theta(grid, Lmax)
    Y = ys_theta_table(m, s, Lmax, cos_theta=grid.cos_theta)
    return np.tensordot(Y * grid.weights, np.asarray(samples), axes=(1, 0))


def swsh_backward(coeffs, m, s, grid):
    coeffs = np.asarray(coeffs)
    Lmax = coeffs.shape[0] - 1
    Y = ys_theta_table(m, s, Lmax, cos_theta=grid.cos_theta)
    return np.tensordot(Y, coeffs, axes=(0, 0))


def fourier_forward(samples, Lmax, grid):
    """Phi samples (last axis) -> dict m -> theta profile, with the 1/sqrt(2 pi) factor."""
    if grid.n_phi < 2 * Lmax + 1:
        raise ValueError(f"{grid.n_phi} phi nodes cannot resolve Lmax={Lmax}; need {2 * Lmax + 1}")
    samples = np.asarray(samples)
    if samples.shape[-1] != grid.n_phi:
        raise ValueError(f"last axis has {samples.shape[-1]} samples, grid has {grid.n_phi} phi nodes")
    F = np.fft.fft(samples, axis=-1) * (np.sqrt(2 * np.pi) / grid.n_phi)
    return {m: F[..., m % grid.n_phi] for m in range(-Lmax, Lmax + 1)}


def fourier_backward(profiles, grid):
    """Inverse of ``fourier_forward``: dict m -> profile, summed on the phi grid."""
    out = None
    for m, prof in profiles.items():
        term = np.asarray(prof)[..., None] * np.exp(1j * m * grid.phi) / np.sqrt(2 * np.pi)
        out = term if out is None else out + term
    return out
