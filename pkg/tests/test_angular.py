import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ballspec.angular import (
    SWHIndex,
    build_cos_op,
    build_sin_op,
    ell_min,
    eval_Ys,
    fourier_backward,
    fourier_forward,
    k_wavenumber,
    sphere_grid,
    swsh_backward,
    swsh_forward,
    ys_theta_table,
)


def test_index_validation():
    SWHIndex(2, -2, 1)
    with pytest.raises(ValueError):
        SWHIndex(1, 0, 2)
    with pytest.raises(ValueError):
        eval_Ys(1, 2, 0, 0.3, 0.0)
    with pytest.raises(ValueError):
        eval_Ys(1, 0, 0, 4.0, 0.0)


def test_monopole_value():
    th, ph = np.array([0.1, 1.3, 2.9]), np.array([0.0, 2.0, -1.0])
    assert_allclose(eval_Ys(0, 0, 0, th, ph), 1 / np.sqrt(4 * np.pi), rtol=1e-15)


@pytest.mark.parametrize(
    "s,ell,m,expected",
    [
        # theta part times sqrt(2 pi), from the explicit binomial sum in mpmath
        (0, 2, 1, -0.954157598192475491343312719314),
        (1, 2, 1, -0.470290015861994737167130404496),
        (-1, 3, 2, 1.08841250349505004540572565396),
        (2, 3, -1, -1.08841250349505004540572565396),
    ],
)
def test_reference_values(s, ell, m, expected):
    val = eval_Ys(ell, m, s, 0.7, 0.0) * np.sqrt(2 * np.pi)
    assert val.real == pytest.approx(expected, rel=1e-13)
    assert val.imag == 0.0


@pytest.mark.parametrize("ell,m,s", [(3, 1, 2), (4, -2, 1), (5, 3, -2), (2, 0, 1)])
def test_conjugation(ell, m, s):
    th = np.linspace(0.1, 3.0, 7)
    # reversing phi conjugates
    assert_allclose(eval_Ys(ell, m, s, th, -0.4), np.conj(eval_Ys(ell, m, s, th, 0.4)), atol=1e-15)
    # (m, s) -> (-m, -s) picks up (-1)^(m+s)
    assert_allclose(np.conj(eval_Ys(ell, m, s, th, 0.4)), (-1) ** (m + s) * eval_Ys(ell, -m, -s, th, 0.4), atol=1e-14)


def test_orthogonality_by_quadrature():
    grid = sphere_grid(10)
    Y = ys_theta_table(1, 1, 10, cos_theta=grid.cos_theta)
    assert abs(np.sum(grid.weights * Y[3] * Y[4])) < 1e-12
    assert np.sum(grid.weights * Y[4] ** 2) == pytest.approx(1.0, rel=1e-13)


def test_table_zero_below_lowest_degree():
    Y = ys_theta_table(2, -3, 6, theta=np.linspace(0, np.pi, 5))
    assert ell_min(2, -3) == 3
    assert np.all(Y[:3] == 0)
    assert np.any(Y[3] != 0)


def test_wavenumbers():
    assert k_wavenumber(1, 1, 0) == pytest.approx(-1.0)
    assert k_wavenumber(1, 4, 4) == 0.0
    assert k_wavenumber(-1, 4, -4) == 0.0
    with pytest.raises(ValueError):
        k_wavenumber(0, 2, 0)


def test_rough_laplacian_example():
    ell, s = 5, 2
    k = k_wavenumber
    val = k(-1, ell, s + 1) * k(1, ell, s) + k(1, ell, s - 1) * k(-1, ell, s)
    # -ell(ell+1) + s^2 = -30 + 4
    assert val == pytest.approx(-26.0, rel=1e-14)


@pytest.mark.parametrize("ell,s", [(l, s) for l in range(0, 31, 3) for s in range(-3, 4) if abs(s) <= l])
def test_rough_laplacian_enumeration(ell, s):
    k = k_wavenumber
    val = k(-1, ell, s + 1) * k(1, ell, s) + k(1, ell, s - 1) * k(-1, ell, s)
    assert val == pytest.approx(-ell * (ell + 1) + s * s, abs=1e-11)


@pytest.mark.parametrize("mu", [1, -1])
@pytest.mark.parametrize("ell,m,s", [(3, 1, 0), (4, 2, 1), (5, -1, -2)])
def test_wavenumber_acts_as_derivative(ell, m, s, mu):
    # (d/dtheta - mu (m / sin + s cot)) / sqrt(2) shifts the spin weight by mu
    th = np.linspace(0.3, 2.8, 9)
    h = 1e-6
    f = lambda t: ys_theta_table(m, s, ell, theta=t)[ell]
    df = (f(th + h) - f(th - h)) / (2 * h)
    shifted = (df - mu * (m / np.sin(th) + s / np.tan(th)) * f(th)) / np.sqrt(2)
    assert_allclose(shifted, k_wavenumber(mu, ell, s) * ys_theta_table(m, s + mu, ell, theta=th)[ell], atol=1e-7)


def test_cos_operator_structure():
    C = build_cos_op(0, 3, 12).toarray()
    assert_allclose(np.diag(C), 0.0)
    assert_allclose(C, C.T)
    C00 = build_cos_op(0, 0, 4).toarray()
    assert C00[1, 0] == pytest.approx(1 / np.sqrt(3), rel=1e-15)


@pytest.mark.parametrize("s,m", [(0, 0), (1, 2), (-2, 1), (2, -3)])
def test_cos_operator_pointwise(s, m):
    L = 12
    th = np.linspace(0.05, 3.1, 11)
    Y = ys_theta_table(m, s, L, theta=th)
    C = build_cos_op(s, m, L).toarray()
    for ell in range(ell_min(m, s), L):
        assert_allclose(np.cos(th) * Y[ell], C[:, ell] @ Y, atol=1e-13)


@pytest.mark.parametrize("ell,m,s,direction", [(4, 2, -1, 1), (4, 2, -1, -1), (3, 0, 0, 1), (5, -3, 2, -1)])
def test_sin_operator_pointwise(ell, m, s, direction):
    L = 10
    th = np.linspace(0.05, 3.1, 11)
    S = build_sin_op(s, m, L, direction).toarray()
    Yin = ys_theta_table(m, s, L, theta=th)[ell]
    Yout = ys_theta_table(m, s + direction, L, theta=th)
    assert_allclose(np.sin(th) * Yin, S[:, ell] @ Yout, atol=1e-13)


@pytest.mark.parametrize("s,m", [(1, 2), (0, 0), (-1, 3), (2, -1)])
def test_cos_sin_identity(s, m):
    L = 40
    C = build_cos_op(s, m, L)
    total = (C @ C).interior() + (build_sin_op(s + 1, m, L, -1) @ build_sin_op(s, m, L, 1)).interior()
    eye = np.diag([1.0 if l >= ell_min(m, s) else 0.0 for l in range(L)])
    assert_allclose(total, eye, atol=1e-13)


@pytest.mark.parametrize("s,m", [(0, 1), (1, 2), (-2, 0)])
def test_sin_transpose_and_commutation(s, m):
    L = 20
    up = build_sin_op(s, m, L, 1)
    down = build_sin_op(s + 1, m, L, -1)
    assert_allclose(down.toarray(), up.toarray().T, atol=1e-15)
    assert down.T.out_spin == up.out_spin
    # cos commutes with the sin operators away from the truncation edge
    lhs = (build_cos_op(s + 1, m, L) @ up).interior(L - 2)
    rhs = (up @ build_cos_op(s, m, L)).interior(L - 2)
    assert_allclose(lhs, rhs, atol=1e-14)


def test_operator_composition_checks():
    with pytest.raises(ValueError):
        build_sin_op(0, 1, 5, 1) @ build_sin_op(0, 1, 5, 1)
    with pytest.raises(ValueError):
        build_sin_op(0, 1, 5, 2)
    with pytest.raises(ValueError):
        build_cos_op(3, 0, 2)


def test_swsh_delta_roundtrip():
    L = 12
    grid = sphere_grid(L)
    c = np.zeros(L + 1)
    c[10] = 1.0
    samples = swsh_backward(c, 3, -2, grid)
    assert_allclose(swsh_forward(samples, 3, -2, L, grid), c, atol=1e-12)


def test_swsh_forward_of_harmonic_samples():
    L = 9
    grid = sphere_grid(L)
    samples = eval_Ys(6, -2, 1, grid.theta, 0.0).real * np.sqrt(2 * np.pi)
    coeffs = swsh_forward(samples, -2, 1, L, grid)
    expected = np.zeros(L + 1)
    expected[6] = 1.0
    assert_allclose(coeffs, expected, atol=1e-13)


def test_swsh_forward_random_roundtrip(rng):
    L = 15
    grid = sphere_grid(L)
    c = rng.standard_normal((L + 1, 3))
    c[:2] = 0.0
    back = swsh_forward(swsh_backward(c, 2, 1, grid), 2, 1, L, grid)
    assert_allclose(back, c, atol=1e-13)


def test_swsh_rejects_small_grid():
    with pytest.raises(ValueError):
        swsh_forward(np.zeros(4), 0, 0, 8, sphere_grid(3))


def test_fourier_roundtrip(rng):
    L = 5
    grid = sphere_grid(L)
    profiles = {m: rng.standard_normal(4) + 1j * rng.standard_normal(4) for m in range(-L, L + 1)}
    back = fourier_forward(fourier_backward(profiles, grid), L, grid)
    for m in profiles:
        assert_allclose(back[m], profiles[m], atol=1e-13)
    with pytest.raises(ValueError):
        fourier_forward(np.zeros(3), L, grid)


def test_full_sphere_normalization():
    L = 6
    grid = sphere_grid(L, n_phi=16)
    th, ph = np.meshgrid(grid.theta, grid.phi, indexing="ij")
    Y = eval_Ys(4, 3, -1, th, ph)
    integral = np.sum(grid.weights[:, None] * np.abs(Y) ** 2) * 2 * np.pi / grid.n_phi
    assert integral == pytest.approx(1.0, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(-4, 4), s=st.integers(-3, 3), L=st.integers(5, 20))
def test_swsh_orthonormality_property(m, s, L):
    grid = sphere_grid(L)
    Y = ys_theta_table(m, s, L, cos_theta=grid.cos_theta)
    l0 = ell_min(m, s)
    eye = np.diag([1.0 if l >= l0 else 0.0 for l in range(L + 1)])
    assert_allclose((Y * grid.weights) @ Y.T, eye, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(-4, 4), s=st.integers(-3, 3))
def test_cos_sin_identity_property(m, s):
    L = 15
    C = build_cos_op(s, m, L)
    total = (C @ C).interior() + (build_sin_op(s + 1, m, L, -1) @ build_sin_op(s, m, L, 1)).interior()
    eye = np.diag([1.0 if l >= ell_min(m, s) else 0.0 for l in range(L)])
    assert_allclose(total, eye, atol=1e-13)
