"""Registry of named numerical invariants, run by ``ballspec verify``.

Each check returns its largest residual; a check passes when that residual
is at most its tolerance.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import angular, jacobi, radial, regularity, solver, tensor

__all__ = ["Invariant", "InvariantResult", "REGISTRY", "run_invariants"]


@dataclass(frozen=True)
class Invariant:
    name: str
    module: str
    tolerance: float
    quick: bool
    func: object


@dataclass(frozen=True)
class InvariantResult:
    name: str
    module: str
    max_residual: float
    tolerance: float
    passed: bool
    seconds: float

    def as_dict(self):
        return {
            "name": self.name,
            "module": self.module,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "seconds": self.seconds,
        }


REGISTRY = []


def invariant(module, tolerance, quick=True):
    def wrap(func):
        REGISTRY.append(Invariant(func.__name__, module, tolerance, quick, func))
        return func

    return wrap


def _amax(x):
    x = np.asarray(x.toarray() if hasattr(x, "toarray") else x)
    return float(np.max(np.abs(x))) if x.size else 0.0


# jacobi_core


@invariant("jacobi_core", 1e-12)
def jacobi_relations():
    worst = 0.0
    for a, b in [(0.0, 0.5), (1.5, 2.5), (-0.5, -0.5), (3.0, 0.5)]:
        for n in (1, 5, 20):
            worst = max(worst, jacobi.check_appendix_relations(n, (a, b), np.linspace(-0.95, 0.95, 11)).max_residual)
    return worst


@invariant("jacobi_core", 1e-12)
def jacobi_quadrature_orthogonality():
    worst = 0.0
    for a, b, n in [(0.0, 0.5, 20), (2.0, 7.5, 30), (-0.5, 1.5, 40)]:
        rule = jacobi.gauss_jacobi(n, (a, b))
        P = jacobi.jacobi_table(n, a, b, rule.nodes)
        G = (P * rule.weights) @ P.T
        d = np.sqrt(np.diag(G))
        worst = max(worst, _amax(G / np.outer(d, d) - np.eye(n)))
    return worst


@invariant("jacobi_core", 1e-12)
def jacobi_quadrature_mass():
    worst = 0.0
    for a, b in [(0.0, 0.0), (1.0, 0.5), (-0.5, 3.5)]:
        rule = jacobi.gauss_jacobi(12, (a, b))
        worst = max(worst, abs(rule.weights.sum() / jacobi.jacobi_mass(a, b) - 1))
    return worst


# radial_basis


def _radial_grid_cases():
    return [(a, l) for a in (0.0, -0.5, 1.0) for l in (0, 1, 2, 7)]


@invariant("radial_basis", 1e-12)
def conversion_rmul_identity():
    worst = 0.0
    N = 24
    for a, l in _radial_grid_cases():
        C = radial.build_C((a, l), N).toarray()[:-1, :-1]
        R = radial.build_R((a, l), N).toarray()[:-1, :-1]
        worst = max(worst, _amax(C.T @ C + R.T @ R - np.eye(N - 1)))
    return worst


@invariant("radial_basis", 1e-12)
def raising_lowering_commute():
    worst = 0.0
    N = 24
    for a, l in _radial_grid_cases():
        if l == 0:
            continue
        mp = radial.build_Dminus((a + 1, l + 1), N) @ radial.build_Dplus((a, l), N)
        pm = radial.build_Dplus((a + 1, l - 1), N) @ radial.build_Dminus((a, l), N)
        worst = max(worst, _amax(mp.toarray() - pm.toarray()) / max(1.0, _amax(mp.toarray())))
    return worst


@invariant("radial_basis", 1e-12)
def restriction_row_matches_evaluation():
    worst = 0.0
    for a, l in _radial_grid_cases():
        row = radial.restriction_row((a, l), 30)
        vals = radial.q_table(30, (a, l), np.array([1.0]))[:, 0]
        worst = max(worst, _amax((row - vals) / row))
    return worst


@invariant("radial_basis", 1e-12)
def radial_transform_roundtrip():
    rng = np.random.default_rng(0)
    worst = 0.0
    for a, l in _radial_grid_cases():
        c = rng.standard_normal(16)
        grid = radial.radial_grid(a, 16 + l // 2 + 1, l % 2)
        s = radial.transform_backward(radial.RadialCoeffs(radial.RadialBasisId(a, l), c), grid.r)
        back = radial.transform_forward(s, (a, l), 16, grid).coeffs
        worst = max(worst, _amax(back - c))
    return worst


@invariant("radial_basis", 1e-12)
def radial_orthonormality():
    worst = 0.0
    for a, l in _radial_grid_cases():
        grid = radial.radial_grid(a, 20, l)
        Q = radial.q_table(20, (a, l), grid.r, strip_power=l)
        worst = max(worst, _amax((Q * grid.weights) @ Q.T - np.eye(20)))
    return worst


@invariant("radial_basis", 1e-12)
def laplacian_of_parabola():
    # D-D+ (1 - r^2) is the constant -6
    basis = radial.RadialBasisId(0.0, 0)
    grid = radial.radial_grid(0.0, 8, 0)
    c = radial.transform_forward(1 - grid.r**2, basis, 6, grid).coeffs
    L = radial.build_Dminus((1.0, 1), 6) @ radial.build_Dplus(basis, 6)
    out = radial.transform_backward(radial.RadialCoeffs(basis.shifted(2, 0), L.apply(c)), grid.r)
    return _amax(out + 6)


# angular


def _angular_cases():
    return [(s, m) for s in (-2, -1, 0, 1, 2) for m in (-3, 0, 1, 4)]


@invariant("angular", 1e-12)
def cos_sin_pythagoras():
    worst = 0.0
    L = 16
    for s, m in _angular_cases():
        C = angular.build_cos_op(s, m, L).toarray()
        Sp = angular.build_sin_op(s, m, L, 1)
        Sm = angular.build_sin_op(s + 1, m, L, -1)
        lhs = C @ C + (Sm @ Sp).toarray()
        l0 = angular.ell_min(m, s)
        eye = np.diag([1.0 if l >= l0 else 0.0 for l in range(L + 1)])
        worst = max(worst, _amax((lhs - eye)[: L - 1, : L - 1]))
    return worst


@invariant("angular", 1e-12)
def sin_operators_transpose():
    worst = 0.0
    for s, m in _angular_cases():
        Sp = angular.build_sin_op(s, m, 16, 1).toarray()
        Sm = angular.build_sin_op(s + 1, m, 16, -1).toarray()
        worst = max(worst, _amax(Sm - Sp.T))
    return worst


@invariant("angular", 1e-12)
def swsh_orthonormality():
    worst = 0.0
    L = 20
    grid = angular.sphere_grid(L)
    for s, m in _angular_cases():
        Y = angular.ys_theta_table(m, s, L, cos_theta=grid.cos_theta)
        G = (Y * grid.weights) @ Y.T
        l0 = angular.ell_min(m, s)
        eye = np.diag([1.0 if l >= l0 else 0.0 for l in range(L + 1)])
        worst = max(worst, _amax(G - eye))
    return worst


@invariant("angular", 1e-12)
def rough_laplacian_closed_form():
    worst = 0.0
    for ell in range(0, 31):
        for s in range(-3, 4):
            if abs(s) > ell:
                continue
            k = angular.k_wavenumber
            prod = k(-1, ell, s + 1) * k(1, ell, s) + k(1, ell, s - 1) * k(-1, ell, s)
            worst = max(worst, abs(prod - (-ell * (ell + 1) + s * s)))
    return worst


# regularity


@invariant("regularity", 1e-13)
def q_orthonormality():
    worst = 0.0
    for rank in (1, 2, 3):
        for ell in range(0, 21):
            Q = regularity.build_Q(ell, rank)
            M = Q.matrix[:, Q.valid_cols]
            worst = max(worst, _amax(M.T @ M - np.eye(M.shape[1])))
    return worst


@invariant("regularity", 1e-15)
def q_rank1_closed_form():
    worst = 0.0
    for ell in range(1, 21):
        Q = regularity.build_Q(ell, 1).matrix
        a, b = np.sqrt(ell / (2 * ell + 1)), np.sqrt((ell + 1) / (2 * ell + 1))
        s = np.sqrt(0.5)
        ref = np.array([[s * b, s, -s * a], [a, 0, b], [-s * b, s, s * a]])
        worst = max(worst, _amax(Q - ref))
    return worst


@invariant("regularity", 1e-12)
def contraction_identity():
    worst = 0.0
    for rank in (2, 3):
        for ell in range(0, 11):
            worst = max(worst, regularity.contract_identity_check(ell, rank))
    return worst


@invariant("regularity", 0.0)
def degeneracy_trinomial():
    worst = 0
    for rank in range(0, 6):
        coeffs = np.polynomial.polynomial.polypow([1, 1, 1], rank)
        for a in range(-rank, rank + 1):
            worst = max(worst, abs(regularity.degeneracy(a, rank) - int(round(coeffs[a + rank]))))
    return float(worst)


@invariant("regularity", 1e-14)
def spin_basis_unitary():
    worst = 0.0
    for rank in (1, 2, 3):
        U = regularity.spin_basis_transform(rank).matrix
        worst = max(worst, _amax(U @ U.conj().T - np.eye(3**rank)))
    return worst


# tensor_calculus


def _vector_ops(ell, N):
    a = 0.0
    grad = tensor.gradient_operator(ell, 0, a, N)
    curl0 = tensor.curl_operator(ell, a, N)
    curl1 = tensor.curl_operator(ell, a + 1, N)
    div1 = tensor.divergence_operator(ell, 1, a + 1, N)
    return grad, curl0, curl1, div1


@invariant("tensor_calculus", 1e-12)
def div_curl_vanishes():
    worst = 0.0
    for ell in (1, 2, 5, 16):
        _, curl0, _, div1 = _vector_ops(ell, 32)
        worst = max(worst, _amax((div1 @ curl0).matrix))
    return worst


@invariant("tensor_calculus", 1e-12)
def curl_grad_vanishes():
    worst = 0.0
    for ell in (1, 2, 5, 16):
        grad, _, curl1, _ = _vector_ops(ell, 32)
        worst = max(worst, _amax((curl1 @ grad).matrix))
    return worst


@invariant("tensor_calculus", 1e-12)
def vector_laplacian_identity():
    worst = 0.0
    N = 32
    for ell in (1, 2, 5, 16):
        lap = tensor.laplacian_operator(ell, 1, 0.0, N).matrix
        gd = (tensor.gradient_operator(ell, 0, 1.0, N) @ tensor.divergence_operator(ell, 1, 0.0, N)).matrix
        cc = (tensor.curl_operator(ell, 1.0, N) @ tensor.curl_operator(ell, 0.0, N)).matrix
        worst = max(worst, _amax(gd - cc - lap) / _amax(lap))
    return worst


@invariant("tensor_calculus", 1e-12)
def laplacian_orders_agree():
    worst = 0.0
    for ell in (1, 3, 8):
        for rank in (0, 1, 2):
            mp = tensor.laplacian_operator(ell, rank, 0.0, 24).matrix
            pm = tensor.laplacian_operator(ell, rank, 0.0, 24, order="plus_minus").matrix
            worst = max(worst, _amax(mp - pm) / _amax(mp))
    return worst


@invariant("tensor_calculus", 1e-12)
def lambda_diagonalization():
    worst = 0.0
    for rank in (1, 2):
        for ell in range(0, 11):
            Q = regularity.build_Q(ell, rank)
            lam = tensor.build_lambda(rank, ell).matrix
            M = Q.matrix[:, Q.valid_cols]
            degs = [ell + sum(a) for a, ok in zip(regularity.multi_indices(rank), Q.valid_cols) if ok]
            worst = max(worst, _amax(M.T @ lam @ M - np.diag([d * (d + 1.0) for d in degs])))
    return worst


@invariant("tensor_calculus", 1e-12)
def sphere_laplacian_paths_agree():
    worst = 0.0
    for sigma in [(), (1,), (-1,), (1, 1), (1, -1), (-1, -1)]:
        for ell in range(abs(sum(sigma)), 12):
            worst = max(worst, tensor.sphere_laplacian_check(sigma, ell).residual)
    return worst


@invariant("tensor_calculus", 1e-10, quick=False)
def projection_roundtrip():
    worst = 0.0
    for rank in (0, 1, 2):
        f = tensor.random_field(rank, 8, 12, rng=rank)
        g = tensor.projection_grid(8, 12, rank)
        back = tensor.project_tensor(tensor.synthesize_tensor(f, g), rank, 8, 12, g)
        worst = max(worst, f.max_abs_difference(back))
    return worst


@invariant("tensor_calculus", 1e-10)
def projection_roundtrip_small():
    f = tensor.random_field(1, 4, 6, rng=7)
    g = tensor.projection_grid(4, 6, 1)
    return f.max_abs_difference(tensor.project_tensor(tensor.synthesize_tensor(f, g), 1, 4, 6, g))


# solver


@invariant("solver", 1e-12)
def bessel_ell2_tau():
    ref = solver.PUBLISHED_ROOTS[2]
    return abs(solver.solve_smallest_kappa(solver.assemble_bessel_tau(0.0, 2, 64))[0] - ref) / ref


@invariant("solver", 1e-10)
def bessel_ell64_tau():
    ref = solver.PUBLISHED_ROOTS[64]
    return abs(solver.solve_smallest_kappa(solver.assemble_bessel_tau(0.0, 64, 128))[0] - ref) / ref


@invariant("solver", 1e-12)
def bessel_ell0_pi():
    return abs(solver.solve_smallest_kappa(solver.assemble_bessel_tau(0.0, 0, 32))[0] - np.pi) / np.pi


@invariant("solver", 1e-10)
def galerkin_matches_tau():
    g = solver.solve_smallest_kappa(solver.assemble_bessel_galerkin(0.0, 2, 64))[0]
    t = solver.solve_smallest_kappa(solver.assemble_bessel_tau(0.0, 2, 64))[0]
    return abs(g - t) / t


@invariant("solver", 1e-13)
def tau_drop_equals_truncation():
    sys_ = solver.assemble_bessel_tau(0.0, 3, 20, solver.TauVariant.LAST_ROW_DROP)
    L, M = sys_.operator.toarray(), sys_.mass.toarray()
    A = np.vstack([L[:-1], sys_.boundary_row])
    B = np.vstack([-M[:-1], np.zeros(20)])
    w = sla.eig(A, B, right=False)
    w = np.sort(w[np.isfinite(w)].real)
    k_trunc = np.sqrt(w[w > 0][0])
    k_tau = solver.solve_smallest_kappa(sys_)[0]
    return abs(k_trunc - k_tau) / k_tau


@invariant("solver", 1e-10)
def chebyshev_converges():
    ref = solver.PUBLISHED_ROOTS[2]
    return abs(solver.solve_smallest_kappa(solver.assemble_bessel_chebyshev(2, 64))[0] - ref) / ref


def run_invariants(quick=False, names=None):
    """Run the registry (or the quick subset, or the named checks)."""
    results = []
    for inv in REGISTRY:
        if names is not None and inv.name not in names:
            continue
        if quick and not inv.quick:
            continue
        t0 = time.perf_counter()
        try:
            r = float(inv.func())
        except Exception:  # a crashing check counts as a failure
            r = float("inf")
        results.append(
            InvariantResult(inv.name, inv.module, r, inv.tolerance, bool(r <= inv.tolerance), time.perf_counter() - t0)
        )
    return results
