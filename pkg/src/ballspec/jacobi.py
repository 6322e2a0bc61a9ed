"""Classical Jacobi polynomials: evaluation, Gauss quadrature and the
connection/derivative relations used as oracles throughout the package."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import eval_jacobi as sc_eval_jacobi
from scipy.special import gammaln

from .kernels import jacobi_table

__all__ = [
    "JacobiParams",
    "QuadratureRule",
    "RelationReport",
    "eval_jacobi",
    "jacobi_derivative_table",
    "jacobi_endpoint",
    "jacobi_mass",
    "jacobi_table",
    "gauss_jacobi",
    "check_appendix_relations",
]


@dataclass(frozen=True)
class JacobiParams:
    """Parameters (a, b) of the weight (1 - z)^a (1 + z)^b on [-1, 1]."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > -1 and self.b > -1):
            raise ValueError(f"Jacobi parameters must exceed -1, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    params: JacobiParams

    def __len__(self):
        return self.nodes.size

    def integrate(self, values):
        """Weighted sum of samples taken at ``nodes`` (leading axis)."""
        return np.tensordot(self.weights, values, axes=(0, 0))


def _as_params(p):
    return p if isinstance(p, JacobiParams) else JacobiParams(*p)


def eval_jacobi(n, p, z):
    """P_n^{(a,b)}(z) by the ascending three-term recurrence.

    ``z`` may be a scalar or an array; the result has the same shape.
    """
    p = _as_params(p)
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a non-negative integer, got {n}")
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > 1 + 1e-14):
        raise ValueError("evaluation point outside [-1, 1]")
    vals = jacobi_table(int(n) + 1, float(p.a), float(p.b), z)[-1]
    return vals.reshape(z.shape)[()]


def jacobi_derivative_table(n, a, b, z):
    """Derivatives of P_0 .. P_{n-1} at ``z`` from the differentiated recurrence.

    No parameter validation, so shifted parameters below -1 are allowed.
    """
    z = np.asarray(z, dtype=float).ravel()
    vals = jacobi_table(n, a, b, z)
    out = np.zeros_like(vals)
    if n > 1:
        out[1] = 0.5 * (a + b + 2.0)
    ab = a + b
    for k in range(2, n):
        c = 2.0 * k + ab
        c1 = 2.0 * k * (k + ab) * (c - 2.0)
        c2 = (c - 1.0) * c * (c - 2.0)
        c3 = (c - 1.0) * (a * a - b * b)
        c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c
        out[k] = ((c2 * z + c3) * out[k - 1] + c2 * vals[k - 1] - c4 * out[k - 2]) / c1
    return out


def jacobi_endpoint(n, a):
    """P_n^{(a,b)}(1) = Gamma(n+a+1) / (Gamma(a+1) n!), through log-gamma."""
    n = np.asarray(n, dtype=float)
    return np.exp(gammaln(n + a + 1) - gammaln(a + 1) - gammaln(n + 1))


def jacobi_mass(a, b):
    """Integral of (1 - z)^a (1 + z)^b over [-1, 1]."""
    return np.exp((a + b + 1) * np.log(2.0) + gammaln(a + 1) + gammaln(b + 1) - gammaln(a + b + 2))


def _recurrence_coefficients(n, a, b):
    """Diagonal and off-diagonal of the symmetric Jacobi matrix of size n."""
    k = np.arange(n, dtype=float)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2))
    if n and abs(a + b) < 1e-300:
        diag[0] = (b - a) / (a + b + 2)
    k = np.arange(1, n, dtype=float)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1) * (s - 1))
    if n > 1 and abs(a + b + 1) < 1e-300:
        # s - 1 vanishes at k = 1; take the limit directly
        off2[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
    return diag, np.sqrt(off2)


def _orthonormal_table(n, a, b, x):
    """Orthonormal polynomials p_0 .. p_{n-1} at x (rows)."""
    diag, off = _recurrence_coefficients(n, a, b)
    out = np.empty((n, x.size))
    out[0] = 1.0 / np.sqrt(jacobi_mass(a, b))
    if n > 1:
        out[1] = (x - diag[0]) * out[0] / off[0]
    for k in range(1, n - 1):
        out[k + 1] = ((x - diag[k]) * out[k] - off[k - 1] * out[k - 1]) / off[k]
    return out


def gauss_jacobi(n, p, polish=True):
    """Gauss rule with ``n`` nodes for the weight (1 - z)^a (1 + z)^b.

    Nodes come from the eigenvalues of the Jacobi matrix. With ``polish``
    one Newton step on P_n sharpens them; the weights are then recomputed
    from the Christoffel sum of orthonormal polynomials.
    """
    p = _as_params(p)
    if int(n) != n or n < 1:
        raise ValueError(f"node count must be a positive integer, got {n}")
    n = int(n)
    a, b = float(p.a), float(p.b)
    diag, off = _recurrence_coefficients(n, a, b)
    x = eigh_tridiagonal(diag, off, eigvals_only=True)
    if polish and n > 1:
        vals = jacobi_table(n + 1, a, b, x)[-1]
        ders = jacobi_derivative_table(n + 1, a, b, x)[-1]
        x = x - vals / ders
    x = np.sort(x)
    w = 1.0 / np.sum(_orthonormal_table(n, a, b, x) ** 2, axis=0)
    return QuadratureRule(nodes=x, weights=w, params=p)


@dataclass(frozen=True)
class RelationReport:
    """Residuals of each Jacobi relation, keyed by a descriptive name."""

    residuals: dict

    @property
    def max_residual(self):
        return max(self.residuals.values())


def _P(n, a, b, z):
    if n < 0:
        return np.zeros_like(z)
    if n >= 2 and _recurrence_breaks(n, a, b):
        # hypergeometric route for the degenerate shifted parameters
        return sc_eval_jacobi(n, a, b, z)
    return jacobi_table(n + 1, a, b, z)[-1]


def _recurrence_breaks(n, a, b):
    k = np.arange(2, n + 1)
    return bool(np.any(np.abs((k + a + b) * (2 * k + a + b - 2)) < 1e-12))


def _dP(n, a, b, z):
    if n < 1:
        return np.zeros_like(z)
    if _recurrence_breaks(n, a, b):
        return 0.5 * (n + a + b + 1) * _P(n - 1, a + 1, b + 1, z)
    return jacobi_derivative_table(n + 1, a, b, z)[-1]


def check_appendix_relations(n, p, z):
    """Evaluate both sides of the four connection and three derivative relations.

    Each residual is scaled by the largest magnitude of the terms involved,
    so the report is meaningful for large-parameter polynomials too.
    """
    p = _as_params(p)
    if n < 1:
        raise ValueError("relations are checked for n >= 1")
    a, b = float(p.a), float(p.b)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    s = 2 * n + a + b + 1

    def resid(lhs, *terms):
        scale = max(1.0, max(np.max(np.abs(t)) for t in (lhs,) + terms))
        return float(np.max(np.abs(lhs - sum(terms))) / scale)

    P = _P(n, a, b, z)
    dP = _dP(n, a, b, z)
    r = {}
    r["raise_a"] = resid(
        P,
        (n + a + b + 1) / s * _P(n, a + 1, b, z),
        -(n + b) / s * _P(n - 1, a + 1, b, z),
    )
    r["one_minus_z_lower_a"] = resid(
        0.5 * (1 - z) * P,
        -(n + 1) / s * _P(n + 1, a - 1, b, z),
        (n + a) / s * _P(n, a - 1, b, z),
    )
    r["raise_b"] = resid(
        P,
        (n + a + b + 1) / s * _P(n, a, b + 1, z),
        (n + a) / s * _P(n - 1, a, b + 1, z),
    )
    r["one_plus_z_lower_b"] = resid(
        0.5 * (1 + z) * P,
        (n + 1) / s * _P(n + 1, a, b - 1, z),
        (n + b) / s * _P(n, a, b - 1, z),
    )
    r["derivative"] = resid(dP, 0.5 * (n + a + b + 1) * _P(n - 1, a + 1, b + 1, z))
    r["derivative_shift_b"] = resid(b * P + (1 + z) * dP, (n + b) * _P(n, a + 1, b - 1, z))
    r["derivative_shift_a"] = resid(a * P - (1 - z) * dP, (n + a) * _P(n, a - 1, b + 1, z))
    return RelationReport(residuals=r)
