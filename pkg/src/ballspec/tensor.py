"""Tensor calculus on regularity components in the ball.

A rank-r field at angular degree ell is stored as one radial coefficient
vector per regularity multi-index a; component a lives in the radial basis
(alpha, ell + sum(a)). Gradient, divergence and curl raise alpha by one,
the Laplacian by two.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .angular import (
    SphereGrid,
    fourier_backward,
    fourier_forward,
    k_wavenumber,
    sphere_grid,
    ys_theta_table,
)
from .radial import (
    RadialBasisId,
    RadialCoeffs,
    RadialGrid,
    build_Dminus,
    build_Dplus,
    q_table,
    radial_grid,
    transform_forward,
)
from .regularity import build_Q, index_position, multi_indices, spin_basis_transform, xi

__all__ = [
    "TensorFieldSpec",
    "ComponentLayout",
    "TensorOperator",
    "LambdaMatrix",
    "SphereLaplacianCheck",
    "ProjectionGrid",
    "component_layout",
    "gradient_operator",
    "divergence_operator",
    "curl_operator",
    "laplacian_operator",
    "trace_operator",
    "gradient",
    "divergence",
    "curl",
    "laplacian",
    "trace",
    "build_lambda",
    "sphere_laplacian_check",
    "projection_grid",
    "project_tensor",
    "synthesize_tensor",
    "evaluate_field",
    "random_field",
    "save_field",
    "load_field",
]

INDEX_ORDER = "product((-1, 0, 1), repeat=rank); first entry most significant; new indices prepended"


@dataclass
class TensorFieldSpec:
    """Spectral state keyed by (ell, m, regularity multi-index)."""

    rank: int
    alpha: float
    Lmax: int
    N: int
    entries: dict = field(default_factory=dict)

    def basis(self, ell, a):
        return RadialBasisId(self.alpha, ell + sum(a))

    def __setitem__(self, key, coeffs):
        ell, m, a = key
        a = tuple(a)
        if len(a) != self.rank:
            raise ValueError(f"multi-index {a} does not have rank {self.rank}")
        if abs(m) > ell or ell > self.Lmax:
            raise ValueError(f"(ell={ell}, m={m}) outside the band limit {self.Lmax}")
        if not build_Q(ell, self.rank).valid_cols[index_position(a)]:
            raise ValueError(f"component {a} does not exist at ell={ell}")
        if isinstance(coeffs, RadialCoeffs):
            if coeffs.basis != self.basis(ell, a):
                raise ValueError(f"coefficients in {coeffs.basis}, expected {self.basis(ell, a)}")
            coeffs = coeffs.coeffs
        coeffs = np.asarray(coeffs)
        if coeffs.shape != (self.N,):
            raise ValueError(f"expected {self.N} coefficients, got shape {coeffs.shape}")
        self.entries[(ell, m, a)] = RadialCoeffs(self.basis(ell, a), coeffs)

    def __getitem__(self, key):
        ell, m, a = key
        return self.entries[(ell, m, tuple(a))]

    def coeffs(self, ell, m, a):
        """Coefficient array, zeros for absent components."""
        item = self.entries.get((ell, m, tuple(a)))
        return np.zeros(self.N, dtype=complex) if item is None else item.coeffs

    def modes(self):
        """Sorted (ell, m) pairs that carry at least one component."""
        return sorted({(ell, m) for ell, m, _ in self.entries})

    def empty_like(self, rank=None, alpha=None):
        return TensorFieldSpec(
            self.rank if rank is None else rank, self.alpha if alpha is None else alpha, self.Lmax, self.N
        )

    def max_abs_difference(self, other):
        keys = set(self.entries) | set(other.entries)
        if not keys:
            return 0.0
        return max(float(np.max(np.abs(self.coeffs(*k) - other.coeffs(*k)))) for k in keys)


@dataclass(frozen=True)
class ComponentLayout:
    """Stacking order of the existing components at one degree."""

    ell: int
    rank: int
    alpha: float
    N: int
    components: tuple

    def basis(self, a):
        return RadialBasisId(self.alpha, self.ell + sum(a))

    def position(self, a):
        return self.components.index(tuple(a))

    def slice(self, a):
        i = self.position(a)
        return slice(i * self.N, (i + 1) * self.N)

    @property
    def size(self):
        return len(self.components) * self.N

    def stack(self, field_, m):
        return np.concatenate([field_.coeffs(self.ell, m, a) for a in self.components]) if self.components else np.zeros(0)


def component_layout(ell, rank, alpha, N):
    Q = build_Q(ell, rank)
    comps = tuple(a for a, ok in zip(multi_indices(rank), Q.valid_cols) if ok)
    return ComponentLayout(int(ell), int(rank), float(alpha), int(N), comps)


@dataclass(frozen=True)
class TensorOperator:
    """Block-sparse map between two component layouts at one degree."""

    in_layout: ComponentLayout
    out_layout: ComponentLayout
    matrix: sp.csr_matrix

    def __matmul__(self, other):
        if isinstance(other, TensorOperator):
            if other.out_layout != self.in_layout:
                raise ValueError("layouts do not chain")
            return TensorOperator(other.in_layout, self.out_layout, (self.matrix @ other.matrix).tocsr())
        return self.matrix @ other

    def __sub__(self, other):
        if (self.in_layout, self.out_layout) != (other.in_layout, other.out_layout):
            raise ValueError("operators act between different layouts")
        return TensorOperator(self.in_layout, self.out_layout, (self.matrix - other.matrix).tocsr())

    def toarray(self):
        return self.matrix.toarray()


def _radial(sign, alpha, ell, N):
    """D^+ or D^- at degree ell as a sparse matrix."""
    builder = build_Dplus if sign > 0 else build_Dminus
    return builder((alpha, ell), N).to_sparse()


def _assemble(in_layout, out_layout, blocks):
    grid = [[None] * max(1, len(in_layout.components)) for _ in range(max(1, len(out_layout.components)))]
    for (ao, ai), block in blocks.items():
        i, j = out_layout.position(ao), in_layout.position(ai)
        grid[i][j] = block if grid[i][j] is None else grid[i][j] + block
    if not in_layout.components or not out_layout.components:
        M = sp.csr_matrix((out_layout.size, in_layout.size))
    else:
        N = in_layout.N
        for i in range(len(grid)):
            for j in range(len(grid[0])):
                if grid[i][j] is None:
                    grid[i][j] = sp.csr_matrix((N, N))
        M = sp.bmat(grid, format="csr")
    return TensorOperator(in_layout, out_layout, M)


def gradient_operator(ell, rank, alpha, N):
    """B^{ab} = xi^a_{ell+b} D^a_{ell+b} A^b (a = 0 rows vanish)."""
    lin = component_layout(ell, rank, alpha, N)
    lout = component_layout(ell, rank + 1, alpha + 1, N)
    blocks = {}
    for ab in lout.components:
        a, b = ab[0], ab[1:]
        deg = ell + sum(b)
        if a == 0 or b not in lin.components:
            continue
        blocks[(ab, b)] = xi(a, deg) * _radial(a, alpha, deg, N)
    return _assemble(lin, lout, blocks)


def divergence_operator(ell, rank, alpha, N):
    """Contract the leading index: B^b = sum_a xi^a_{ell+b} D^{-a}_{ell+a+b} A^{ab}."""
    if rank < 1:
        raise ValueError("divergence needs rank >= 1")
    lin = component_layout(ell, rank, alpha, N)
    lout = component_layout(ell, rank - 1, alpha + 1, N)
    blocks = {}
    for b in lout.components:
        for a in (-1, 1):
            ab = (a,) + b
            if ab not in lin.components:
                continue
            blocks[(b, ab)] = xi(a, ell + sum(b)) * _radial(-a, alpha, ell + sum(ab), N)
    return _assemble(lin, lout, blocks)


def curl_operator(ell, alpha, N):
    """Curl of a vector field; the result carries factors of i."""
    lin = component_layout(ell, 1, alpha, N)
    lout = component_layout(ell, 1, alpha + 1, N)
    blocks = {}

    def add(out, inp, coef, sign, deg):
        if (out,) in lout.components and (inp,) in lin.components and coef != 0:
            blocks[((out,), (inp,))] = coef * _radial(sign, alpha, deg, N).astype(complex)

    if ell >= 1:
        add(-1, 0, -1j * xi(1, ell), -1, ell)
        add(0, -1, -1j * xi(1, ell), 1, ell - 1)
    add(0, 1, 1j * xi(-1, ell), -1, ell + 1)
    add(1, 0, 1j * xi(-1, ell), 1, ell)
    return _assemble(lin, lout, blocks)


def laplacian_operator(ell, rank, alpha, N, order="minus_plus"):
    """Diagonal Laplacian D^-_{L+1} D^+_L per component, L = ell + sum(a).

    ``order="plus_minus"`` uses D^+_{L-1} D^-_L instead wherever L >= 1.
    """
    if order not in ("minus_plus", "plus_minus"):
        raise ValueError(f"unknown order {order!r}")
    lin = component_layout(ell, rank, alpha, N)
    lout = component_layout(ell, rank, alpha + 2, N)
    blocks = {}
    for a in lin.components:
        L = ell + sum(a)
        if order == "plus_minus" and L >= 1:
            blocks[(a, a)] = _radial(1, alpha + 1, L - 1, N) @ _radial(-1, alpha, L, N)
        else:
            blocks[(a, a)] = _radial(-1, alpha + 1, L + 1, N) @ _radial(1, alpha, L, N)
    return _assemble(lin, lout, blocks)


def trace_operator(ell, rank, alpha, N):
    """Contract the two leading spin indices with the dot-product metric.

    Only pairs a = -b survive; the weights come from the rotations
    themselves rather than a closed form.
    """
    if rank < 2:
        raise ValueError("trace needs rank >= 2")
    lin = component_layout(ell, rank, alpha, N)
    lout = component_layout(ell, rank - 2, alpha, N)
    big = build_Q(ell, rank).matrix
    small = build_Q(ell, rank - 2).matrix
    m = 3 ** (rank - 2)
    blocks = {}
    eye = sp.identity(N, format="csr")
    for c in lout.components:
        ic = index_position(c)
        for a in (-1, 0, 1):
            abc = (a, -a) + c
            if abc not in lin.components:
                continue
            col = big[:, index_position(abc)].reshape(3, 3, m)
            contracted = col[0, 2] + col[1, 1] + col[2, 0]
            weight = float(small[:, ic] @ contracted)
            blocks[(c, abc)] = weight * eye
    return _assemble(lin, lout, blocks)


def _apply_per_mode(field_, builder, out_rank, out_alpha):
    out = TensorFieldSpec(out_rank, out_alpha, field_.Lmax, field_.N)
    for ell, m in field_.modes():
        op = builder(ell)
        x = op.in_layout.stack(field_, m)
        y = op.matrix @ x
        for a in op.out_layout.components:
            out.entries[(ell, m, a)] = RadialCoeffs(op.out_layout.basis(a), np.asarray(y[op.out_layout.slice(a)]))
    return out


def gradient(T):
    return _apply_per_mode(T, lambda l: gradient_operator(l, T.rank, T.alpha, T.N), T.rank + 1, T.alpha + 1)


def divergence(T):
    if T.rank < 1:
        raise ValueError("divergence needs rank >= 1")
    return _apply_per_mode(T, lambda l: divergence_operator(l, T.rank, T.alpha, T.N), T.rank - 1, T.alpha + 1)


def curl(v):
    if v.rank != 1:
        raise ValueError("curl is defined for vector fields only")
    return _apply_per_mode(v, lambda l: curl_operator(l, v.alpha, v.N), 1, v.alpha + 1)


def trace(T):
    """Contract the two leading indices."""
    if T.rank < 2:
        raise ValueError("trace needs rank >= 2")
    return _apply_per_mode(T, lambda l: trace_operator(l, T.rank, T.alpha, T.N), T.rank - 2, T.alpha)


def laplacian(T, order="minus_plus"):
    return _apply_per_mode(T, lambda l: laplacian_operator(l, T.rank, T.alpha, T.N, order), T.rank, T.alpha + 2)


# Angular part of the Laplacian in the spin basis, built from the covariant
# derivative of the spin basis vectors.


def _angular_derivative(mu, ell, rank):
    """r * (spin-mu angular derivative) acting on the spin components.

    Includes the harmonic wavenumber and the connection terms that rotate
    a tangential basis vector into the radial one and back.
    """
    idx = multi_indices(rank)
    n = len(idx)
    M = np.zeros((n, n))
    for j, s in enumerate(idx):
        if abs(sum(s)) > ell:
            continue
        M[j, j] += k_wavenumber(mu, ell, sum(s))
        for slot, value in enumerate(s):
            terms = []
            if value == mu:
                terms.append((0, -1.0))
            if value == 0:
                terms.append((-mu, 1.0))
            for new, c in terms:
                t = list(s)
                t[slot] = new
                M[index_position(tuple(t)), j] += c
    return M


@dataclass(frozen=True)
class LambdaMatrix:
    rank: int
    ell: int
    matrix: np.ndarray

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def build_lambda(rank, ell):
    """Matrix Lambda with lap(T) = T'' + 2T'/r - Lambda T / r^2 in spin components.

    Assembled by taking the gradient (radial derivative plus angular
    derivatives with connection terms) twice and contracting.
    """
    if rank < 0 or ell < 0:
        raise ValueError("rank and ell must be non-negative")
    n = 3**rank
    pos = {s: i for i, s in enumerate(multi_indices(rank + 1))}
    # gradient: radial-derivative part and 1/r part, as maps on components
    grad_r = np.zeros((3 * n, n))
    for i, s in enumerate(multi_indices(rank)):
        grad_r[pos[(0,) + s], i] = 1.0
    # (1/r) part, slot mu = angular derivative mu
    grad_ang = np.zeros((3 * n, n))
    for mu in (-1, 1):
        H = _angular_derivative(mu, ell, rank)
        for i, s in enumerate(multi_indices(rank)):
            grad_ang[pos[(mu,) + s], :] += H[i, :]
    # contracting the second derivative: only the angular parts of the
    # outer derivative contribute 1/r^2 terms
    coef_over_r2 = np.zeros((n, n))
    for nu in (-1, 1):
        H = _angular_derivative(nu, ell, rank + 1)
        for i, s in enumerate(multi_indices(rank)):
            coef_over_r2[i] += H[pos[(-nu,) + s], :] @ grad_ang
    return LambdaMatrix(rank, ell, -coef_over_r2)


@dataclass(frozen=True)
class SphereLaplacianCheck:
    """Both Laplacians on the unit sphere for one basis element.

    ``rough`` comes from products of wavenumbers, ``restricted`` from the
    diagonal of the 3D angular operator (tangential indices only, else None).
    The closed forms are kept alongside for comparison.
    """

    rough: float
    restricted: float
    rough_closed: float
    restricted_closed: float

    @property
    def residual(self):
        r = abs(self.rough - self.rough_closed)
        if self.restricted is not None:
            r = max(r, abs(self.restricted - self.restricted_closed))
        return r


def sphere_laplacian_check(sigma, ell):
    sigma = tuple(sigma)
    s = sum(sigma)
    if ell < abs(s):
        raise ValueError(f"ell={ell} below |spin weight| = {abs(s)}")
    rough = k_wavenumber(-1, ell, s + 1) * k_wavenumber(1, ell, s) + k_wavenumber(1, ell, s - 1) * k_wavenumber(
        -1, ell, s
    )
    restricted = None
    if 0 not in sigma:
        lam = build_lambda(len(sigma), ell).matrix
        i = index_position(sigma)
        restricted = -float(lam[i, i])
    return SphereLaplacianCheck(
        rough=float(rough),
        restricted=restricted,
        rough_closed=float(-ell * (ell + 1) + s * s),
        restricted_closed=float(-(ell * (ell + 1) - s * s + len(sigma))),
    )


# Grid <-> spectral projection


@dataclass(frozen=True)
class ProjectionGrid:
    radial: RadialGrid
    sphere: SphereGrid

    @property
    def shape(self):
        return (self.radial.size, self.sphere.n_theta, self.sphere.n_phi)


def projection_grid(Lmax, N, rank, alpha=0.0, n_r=None, n_theta=None, n_phi=None):
    """Smallest exact grid for rank-``rank`` fields of band limit (Lmax, N)."""
    need = N + max(0, -(-(Lmax + rank - 1) // 2))
    return ProjectionGrid(radial_grid(alpha, need if n_r is None else n_r, 0), sphere_grid(Lmax, n_theta, n_phi))


def _check_projection_grid(grid, Lmax, N, rank, alpha):
    if grid.radial.alpha != alpha:
        raise ValueError("radial grid weight does not match alpha")
    need = N + max(0, -(-(Lmax + rank - 1) // 2))
    if grid.radial.size < need:
        raise ValueError(f"radial grid of {grid.radial.size} nodes too small; need {need}")
    if grid.sphere.n_theta < Lmax + 1:
        raise ValueError(f"theta grid too small; need {Lmax + 1}")
    if grid.sphere.n_phi < 2 * Lmax + 1:
        raise ValueError(f"phi grid too small; need {2 * Lmax + 1}")


def project_tensor(samples, rank, Lmax, N, grid, alpha=0.0):
    """Coordinate-component samples -> regularity-component spectral field.

    ``samples`` has shape (3**rank, n_r, n_theta, n_phi).
    """
    samples = np.asarray(samples)
    _check_projection_grid(grid, Lmax, N, rank, alpha)
    if samples.shape != (3**rank,) + grid.shape:
        raise ValueError(f"samples shape {samples.shape} does not match {(3**rank,) + grid.shape}")
    spin = spin_basis_transform(rank).to_spin(samples)
    profiles = fourier_forward(spin, Lmax, grid.sphere)
    weights = [sum(s) for s in multi_indices(rank)]
    out = TensorFieldSpec(rank, float(alpha), Lmax, N)
    tables = {}
    for m, prof in profiles.items():
        # prof: (3^rank, n_r, n_theta) -> per-spin harmonic coefficients (ell, n_r)
        harm = np.zeros((3**rank, Lmax + 1, grid.radial.size), dtype=complex)
        for i, s in enumerate(weights):
            if (m, s) not in tables:
                tables[(m, s)] = ys_theta_table(m, s, Lmax, cos_theta=grid.sphere.cos_theta) * grid.sphere.weights
            harm[i] = tables[(m, s)] @ prof[i].T
        for ell in range(abs(m), Lmax + 1):
            Q = build_Q(ell, rank)
            radial_vals = Q.matrix.T @ harm[:, ell, :]
            for j, a in enumerate(multi_indices(rank)):
                if not Q.valid_cols[j]:
                    continue
                c = transform_forward(radial_vals[j], (alpha, ell + sum(a)), N, grid.radial).coeffs
                out.entries[(ell, m, a)] = RadialCoeffs(out.basis(ell, a), c)
    return out


def synthesize_tensor(field_, grid):
    """Inverse of ``project_tensor``: samples in coordinate components."""
    rank, Lmax = field_.rank, field_.Lmax
    _check_projection_grid(grid, Lmax, field_.N, rank, field_.alpha)
    weights = [sum(s) for s in multi_indices(rank)]
    r = grid.radial.r
    profiles = {}
    for m in range(-Lmax, Lmax + 1):
        harm = np.zeros((3**rank, Lmax + 1, r.size), dtype=complex)
        for ell in range(abs(m), Lmax + 1):
            Q = build_Q(ell, rank)
            vals = np.zeros((3**rank, r.size), dtype=complex)
            for j, a in enumerate(multi_indices(rank)):
                item = field_.entries.get((ell, m, a))
                if item is not None and Q.valid_cols[j]:
                    vals[j] = q_table(field_.N, item.basis, r).T @ item.coeffs
            harm[:, ell, :] = Q.matrix @ vals
        prof = np.zeros((3**rank, r.size, grid.sphere.n_theta), dtype=complex)
        for i, s in enumerate(weights):
            Y = ys_theta_table(m, s, Lmax, cos_theta=grid.sphere.cos_theta)
            prof[i] = harm[i].T @ Y
        profiles[m] = prof
    spin = fourier_backward(profiles, grid.sphere)
    return spin_basis_transform(rank).to_coord(spin)


def evaluate_field(field_, r, theta, phi):
    """Coordinate components at scattered points; shape (3**rank, npts)."""
    r, theta, phi = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (r, theta, phi))
    rank = field_.rank
    spin = np.zeros((3**rank, r.size), dtype=complex)
    weights = [sum(s) for s in multi_indices(rank)]
    cos_t = np.cos(theta)
    for (ell, m, a), item in field_.entries.items():
        Q = build_Q(ell, rank)
        radial = q_table(field_.N, item.basis, r).T @ item.coeffs
        col = Q.matrix[:, index_position(a)]
        for i, s in enumerate(weights):
            if col[i] == 0:
                continue
            Y = ys_theta_table(m, s, ell, cos_theta=cos_t)[ell] * np.exp(1j * m * phi) / np.sqrt(2 * np.pi)
            spin[i] += col[i] * radial * Y
    return spin_basis_transform(rank).to_coord(spin)


def random_field(rank, Lmax, N, alpha=0.0, rng=None, scale_decay=0.0):
    """Field with Gaussian complex coefficients on every existing component."""
    rng = np.random.default_rng(rng)
    out = TensorFieldSpec(rank, float(alpha), Lmax, N)
    decay = np.exp(-scale_decay * np.arange(N))
    for ell in range(Lmax + 1):
        valid = build_Q(ell, rank).valid_cols
        for m in range(-ell, ell + 1):
            for j, a in enumerate(multi_indices(rank)):
                if valid[j]:
                    c = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) * decay
                    out.entries[(ell, m, a)] = RadialCoeffs(out.basis(ell, a), c)
    return out


def _format_index(a):
    return ";".join(str(x) for x in a)


def _parse_index(text):
    return tuple(int(x) for x in text.split(";")) if text else ()


def save_field(field_, path):
    """Write ``path.json`` (header) and ``path.csv`` (ell, m, a, n, re, im)."""
    path = Path(path)
    header = {
        "rank": field_.rank,
        "alpha": field_.alpha,
        "Lmax": field_.Lmax,
        "N": field_.N,
        "index_order": INDEX_ORDER,
        "components": len(field_.entries),
    }
    path.with_suffix(".json").write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    with path.with_suffix(".csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ell", "m", "a", "n", "re", "im"])
        for (ell, m, a) in sorted(field_.entries):
            c = np.asarray(field_.entries[(ell, m, a)].coeffs, dtype=complex)
            for n, v in enumerate(c):
                w.writerow([ell, m, _format_index(a), n, repr(float(v.real)), repr(float(v.imag))])


def load_field(path):
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    out = TensorFieldSpec(header["rank"], header["alpha"], header["Lmax"], header["N"])
    buffers = {}
    with path.with_suffix(".csv").open(newline="") as fh:
        for row in csv.DictReader(fh):
            key = (int(row["ell"]), int(row["m"]), _parse_index(row["a"]))
            buf = buffers.setdefault(key, np.zeros(out.N, dtype=complex))
            buf[int(row["n"])] = complex(float(row["re"]), float(row["im"]))
    for key, c in buffers.items():
        out[key] = c
    return out
