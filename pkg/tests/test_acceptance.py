"""The ten acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line that the terminal summary prints at the
end of the run. Criterion 4 is expected to fail; see its docstring.
"""

import time
from collections import Counter

import numpy as np
import pytest

from ballspec import angular, radial, regularity, solver, tensor
from conftest import record_acceptance


def _rel(x, ref):
    return abs(x - ref) / abs(ref)


def _check(number, residual, tol, label):
    ok = residual <= tol
    record_acceptance(number, ok, f"{label}: {residual:.2e} (tol {tol:.0e})")
    assert ok, f"{label}: {residual:.3e} > {tol:.0e}"


def _first_converged(ell, ref, tol, Ns):
    for N in Ns:
        t0 = time.perf_counter()
        k = solver.solve_smallest_kappa(solver.assemble_bessel_tau(0.0, ell, N))[0]
        dt = time.perf_counter() - t0
        if _rel(k, ref) <= tol:
            return N, _rel(k, ref), dt
    return None, _rel(k, ref), dt


def test_criterion_01_bessel_ell2():
    ref = 5.7634591968945498
    t0 = time.perf_counter()
    N, err, _ = _first_converged(2, ref, 1e-12, range(4, 65))
    total = time.perf_counter() - t0
    ok = N is not None and total < 1.0
    record_acceptance(1, ok, f"ell=2 rel err {err:.2e} at N={N}, {total:.3f} s")
    assert ok


def test_criterion_02_bessel_ell64():
    ref = 72.199780933233055
    t0 = time.perf_counter()
    N, err, _ = _first_converged(64, ref, 1e-10, range(8, 129, 8))
    total = time.perf_counter() - t0
    ok = N is not None and total < 5.0
    record_acceptance(2, ok, f"ell=64 rel err {err:.2e} at N={N}, {total:.3f} s")
    assert ok


def test_criterion_03_bessel_ell0_is_pi():
    N, err, _ = _first_converged(0, np.pi, 1e-12, range(4, 33))
    record_acceptance(3, N is not None, f"ell=0 rel err from pi {err:.2e} at N={N}")
    assert N is not None


@pytest.mark.xfail(strict=True, reason="all three methods sit at roundoff for N >= 16, so the ordering is noise")
def test_criterion_04_method_ordering():
    """Strict ordering tau(alpha=0) < Jones-Worland < Chebyshev at N = 16, 32, 64.

    At ell = 2 every method has already converged to double precision by
    N = 16, so the three errors are rounding noise of order 1e-15 and the
    strict ordering does not hold. The test is kept at the stated grid and
    marked strict-xfail, so it turns red if it ever starts passing.
    """
    rows = solver.error_sweep(["tau_alpha0", "jones_worland", "chebyshev"], [2], [16, 32, 64])
    err = {(r.method, r.N): r.rel_error for r in rows}
    bad = [N for N in (16, 32, 64)
           if not err["tau_alpha0", N] < err["jones_worland", N] < err["chebyshev", N]]
    detail = "; ".join(
        f"N={N}: {err['tau_alpha0', N]:.1e}/{err['jones_worland', N]:.1e}/{err['chebyshev', N]:.1e}"
        for N in (16, 32, 64)
    )
    record_acceptance(4, not bad, f"tau/JW/cheb {detail}")
    assert not bad, f"ordering violated at N={bad}"


def test_criterion_04_ordering_before_roundoff():
    # not an acceptance line: the same ordering where errors are still resolvable
    rows = solver.error_sweep(["tau_alpha0", "jones_worland", "chebyshev"], [2], [4, 6, 8, 10])
    err = {(r.method, r.N): r.rel_error for r in rows}
    for N in (4, 6, 8, 10):
        assert err["tau_alpha0", N] < err["jones_worland", N] < err["chebyshev", N]


def test_criterion_05_operator_identities():
    t0 = time.perf_counter()
    worst = {}
    N = 32
    for a in (0.0, -0.5, 0.5, 1.0, 2.5):
        for ell in (0, 1, 2, 5, 12):
            C = radial.build_C((a, ell), N).toarray()
            R = radial.build_R((a, ell), N).toarray()
            # the last column of each truncated operator needs one more output mode
            G = (C.T @ C + R.T @ R)[:-1, :-1]
            worst["CC+RR"] = max(worst.get("CC+RR", 0.0), np.max(np.abs(G - np.eye(N - 1))))
            if ell >= 1:
                mp = (radial.build_Dminus((a + 1, ell + 1), N) @ radial.build_Dplus((a, ell), N)).toarray()
                pm = (radial.build_Dplus((a + 1, ell - 1), N) @ radial.build_Dminus((a, ell), N)).toarray()
                worst["D-D+"] = max(worst.get("D-D+", 0.0), np.max(np.abs(mp - pm)))
    L = 24
    for s in range(-3, 4):
        for m in range(-5, 6):
            cos = angular.build_cos_op(s, m, L).toarray()
            sp = angular.build_sin_op(s, m, L, 1).toarray()
            sm = angular.build_sin_op(s + 1, m, L, -1).toarray()
            lmin = angular.ell_min(m, s)
            eye = np.diag([1.0 if l >= lmin else 0.0 for l in range(L + 1)])
            worst["CC+S+S-"] = max(worst.get("CC+S+S-", 0.0),
                                   np.max(np.abs((cos @ cos + sm @ sp - eye)[: L - 1, : L - 1])))
            worst["S-=S+^T"] = max(worst.get("S-=S+^T", 0.0), np.max(np.abs(sm - sp.T)))
    elapsed = time.perf_counter() - t0
    res = max(worst.values())
    ok = res <= 1e-12 and elapsed < 30
    parts = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    record_acceptance(5, ok, f"{parts}; {elapsed:.2f} s")
    assert ok


def test_criterion_06_q_rotation():
    ortho = 0.0
    for rank in (1, 2, 3):
        for ell in range(0, 21):
            Q = regularity.build_Q(ell, rank)
            M = Q.matrix[:, Q.valid_cols]
            ortho = max(ortho, np.max(np.abs(M.T @ M - np.eye(M.shape[1]))))
    closed = 0.0
    h = np.sqrt(0.5)
    for ell in range(1, 21):
        lo, hi = np.sqrt(ell / (2 * ell + 1)), np.sqrt((ell + 1) / (2 * ell + 1))
        ref = np.array([[h * hi, h, -h * lo], [lo, 0.0, hi], [-h * hi, h, h * lo]])
        closed = max(closed, np.max(np.abs(regularity.build_Q(ell, 1).matrix - ref)))
    spectrum = 0.0
    mult_ok = True
    for rank, expected in ((1, [1, 1, 1]), (2, [1, 2, 3, 2, 1])):
        for ell in range(rank, 21):
            ev = tensor.build_lambda(rank, ell).eigenvalues()
            degs = np.arange(ell - rank, ell + rank + 1)
            target = np.repeat(degs * (degs + 1.0), expected)
            spectrum = max(spectrum, np.max(np.abs(np.sort(ev) - target)) / target.max())
            counts = Counter(int(round(x)) for x in ev)
            mult_ok &= [counts[int(d * (d + 1))] for d in degs] == expected
    ok = ortho <= 1e-13 and closed <= 1e-15 and spectrum <= 1e-12 and mult_ok
    record_acceptance(6, ok, f"orthonormality {ortho:.1e}, rank-1 closed form {closed:.1e}, "
                             f"Lambda spectrum {spectrum:.1e}, multiplicities {'ok' if mult_ok else 'wrong'}")
    assert ok


def test_criterion_07_contraction():
    worst = max(regularity.contract_identity_check(ell, rank) for rank in (2, 3) for ell in range(0, 11))
    _check(7, worst, 1e-12, "contraction residual, rank 2 and 3, ell <= 10")


def test_criterion_08_vector_calculus():
    # entries reach ~6e3 at ell = 16, where one ulp is ~1e-12, so residuals
    # are measured relative to the largest Laplacian entry
    worst = {"div curl": 0.0, "curl grad": 0.0, "laplacian": 0.0}
    absolute = 0.0
    N = 32
    for ell in (1, 2, 5, 16):
        grad = tensor.gradient_operator(ell, 0, 0.0, N)
        curl0 = tensor.curl_operator(ell, 0.0, N)
        curl1 = tensor.curl_operator(ell, 1.0, N)
        div0 = tensor.divergence_operator(ell, 1, 0.0, N)
        div1 = tensor.divergence_operator(ell, 1, 1.0, N)
        lap = tensor.laplacian_operator(ell, 1, 0.0, N).toarray()
        scale = np.max(np.abs(lap))
        worst["div curl"] = max(worst["div curl"], np.max(np.abs((div1 @ curl0).toarray())) / scale)
        worst["curl grad"] = max(worst["curl grad"], np.max(np.abs((curl1 @ grad).toarray())) / scale)
        gd = (tensor.gradient_operator(ell, 0, 1.0, N) @ div0).toarray()
        cc = (curl1 @ curl0).toarray()
        worst["laplacian"] = max(worst["laplacian"], np.max(np.abs(gd - cc - lap)) / scale)
        absolute = max(absolute, np.max(np.abs(gd - cc - lap)))
    res = max(worst.values())
    parts = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    record_acceptance(8, res <= 1e-12, f"{parts} relative; largest absolute {absolute:.1e}")
    assert res <= 1e-12


def test_criterion_09_projection_roundtrip():
    worst = 0.0
    for rank in (0, 1, 2):
        field = tensor.random_field(rank, 8, 12, rng=100 + rank)
        grid = tensor.projection_grid(8, 12, rank)
        samples = tensor.synthesize_tensor(field, grid)
        back = tensor.project_tensor(samples, rank, 8, 12, grid)
        worst = max(worst, field.max_abs_difference(back),
                    float(np.max(np.abs(tensor.synthesize_tensor(back, grid) - samples))))
    _check(9, worst, 1e-10, "rank <= 2 roundtrip at Lmax=8, N=12")


def test_criterion_10_degeneracy():
    mismatches = 0
    for rank in range(0, 6):
        coeffs = np.rint(np.polynomial.polynomial.polypow([1, 1, 1], rank)).astype(int)
        for a in range(-rank, rank + 1):
            mismatches += regularity.degeneracy(a, rank) != coeffs[a + rank]
        counts = Counter(sum(idx) for idx in regularity.multi_indices(rank))
        mismatches += sum(counts[a] != coeffs[a + rank] for a in range(-rank, rank + 1))
    record_acceptance(10, mismatches == 0, f"trinomial mismatches for rank <= 5: {mismatches}")
    assert mismatches == 0
