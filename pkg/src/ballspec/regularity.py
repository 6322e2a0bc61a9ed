"""Orthogonal rotations between spin components and regularity components
of rank-r tensors, and the index bookkeeping that goes with them.

Multi-indices of rank r are enumerated in ``itertools.product((-1, 0, 1),
repeat=r)`` order; the first entry is the most significant, and a new
index is always prepended.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .angular import k_wavenumber

__all__ = [
    "MultiIndex",
    "QRotation",
    "SpinGeneratorSet",
    "SpinBasisTransform",
    "multi_indices",
    "index_position",
    "xi",
    "build_Q",
    "build_generators",
    "contract_identity_check",
    "degeneracy",
    "spin_basis_transform",
]

SQRT2 = np.sqrt(2.0)
_J_MINUS = np.array([[0.0, -SQRT2, 0.0], [0.0, 0.0, SQRT2], [0.0, 0.0, 0.0]])
_J_PLUS = _J_MINUS.T.copy()
_J_ZERO = np.diag([-1.0, 0.0, 1.0])
_J_RANK1 = {-1: _J_MINUS, 0: _J_ZERO, 1: _J_PLUS}


@dataclass(frozen=True)
class MultiIndex:
    """Ordered tuple of entries from {-1, 0, +1}."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e not in (-1, 0, 1) for e in entries):
            raise ValueError(f"multi-index entries must be -1, 0 or 1, got {entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def rank(self):
        return len(self.entries)

    def spin_weight(self):
        return sum(self.entries)

    def dual(self):
        """Negated and reversed index."""
        return MultiIndex(tuple(-e for e in reversed(self.entries)))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


@lru_cache(maxsize=None)
def multi_indices(rank):
    """All rank-``rank`` multi-indices, in storage order."""
    return tuple(product((-1, 0, 1), repeat=rank))


@lru_cache(maxsize=None)
def _positions(rank):
    return {idx: i for i, idx in enumerate(multi_indices(rank))}


def index_position(idx):
    """Storage position of a multi-index (tuple or MultiIndex)."""
    idx = tuple(idx)
    return _positions(len(idx))[idx]


def _spin_weights(rank):
    return np.array([sum(t) for t in multi_indices(rank)], dtype=int)


def xi(sign, ell):
    """Gradient weights: sqrt(ell/(2ell+1)), 0, sqrt((ell+1)/(2ell+1)) for sign -1, 0, +1."""
    if sign not in (-1, 0, 1):
        raise ValueError(f"sign must be -1, 0 or 1, got {sign}")
    if ell < 0:
        raise ValueError(f"ell must be non-negative, got {ell}")
    if sign == 0:
        return 0.0
    return float(np.sqrt((ell if sign < 0 else ell + 1) / (2 * ell + 1)))


@dataclass(frozen=True)
class SpinGeneratorSet:
    """Matrices J^sigma of a rank-r tensor for sigma in (-1, 0, +1)."""

    rank: int
    matrices: dict

    def __getitem__(self, sigma):
        return self.matrices[sigma]


@lru_cache(maxsize=None)
def _generator(sigma, rank):
    if rank == 0:
        # neutral element of the Kronecker sum
        return np.zeros((1, 1))
    base = _J_RANK1[-sigma]
    prev = _generator(sigma, rank - 1)
    return np.kron(prev, np.eye(3)) + np.kron(np.eye(3 ** (rank - 1)), base)


def build_generators(rank):
    """Kronecker-sum lifts of the rank-1 matrices, J^sigma_1 = J_{-sigma}."""
    if rank < 1:
        raise ValueError("generators are defined for rank >= 1")
    return SpinGeneratorSet(rank, {s: _generator(s, rank).copy() for s in (-1, 0, 1)})


@dataclass(frozen=True)
class QRotation:
    """Orthogonal matrix Q[sigma, a] for one angular degree and tensor rank.

    Rows are spin multi-indices, columns regularity multi-indices. Columns
    whose regularity component does not exist at this degree are zero and
    flagged False in ``valid_cols``; rows whose spin weight exceeds the
    degree are flagged False in ``valid_rows``.
    """

    ell: int
    rank: int
    matrix: np.ndarray
    valid_cols: np.ndarray
    valid_rows: np.ndarray

    @property
    def indices(self):
        return multi_indices(self.rank)

    def entry(self, sigma, a):
        return self.matrix[index_position(sigma), index_position(a)]


def _column_valid(ell, a):
    total = ell
    for entry in reversed(a):
        if entry < 1 and total < 1:
            return False
        total += entry
    return True


def _recursion_step(ell, Q, rank):
    """Rank ``rank`` -> rank + 1 with the new index prepended."""
    n = 3**rank
    tau_bar = _spin_weights(rank)
    L = ell + _spin_weights(rank)  # shifted degree per column b
    out = np.zeros((3 * n, 3 * n))
    with np.errstate(divide="ignore", invalid="ignore"):
        den_minus = np.sqrt(L * (2 * L + 1.0))
        den_zero = np.sqrt(L * (L + 1.0))
        den_plus = np.sqrt((L + 1.0) * (2 * L + 1.0))
    for i, sigma in enumerate((-1, 0, 1)):
        kvec = np.array([k_wavenumber(sigma, ell, t) if sigma else 0.0 for t in tau_bar])
        R = -kvec[:, None] * Q
        if sigma and rank:
            R = R + sigma / SQRT2 * (_generator(sigma, rank) @ Q)
        d0 = 1.0 if sigma == 0 else 0.0
        blocks = (
            ((L * d0) * Q - R, den_minus),
            (sigma * R, den_zero),
            (((L + 1) * d0) * Q + R, den_plus),
        )
        for j, (num, den) in enumerate(blocks):
            safe = den > 0
            block = np.zeros_like(Q)
            block[:, safe] = num[:, safe] / den[safe]
            out[i * n : (i + 1) * n, j * n : (j + 1) * n] = block
    return out


@lru_cache(maxsize=None)
def _build_Q_cached(ell, rank):
    Q = np.ones((1, 1))
    for r in range(rank):
        Q = _recursion_step(ell, Q, r)
    cols = np.array([_column_valid(ell, a) for a in multi_indices(rank)], dtype=bool)
    rows = np.abs(_spin_weights(rank)) <= ell
    Q[:, ~cols] = 0.0
    Q[~rows, :] = 0.0
    return Q, cols, rows


def build_Q(ell, rank):
    """Rotation from regularity to spin components at degree ``ell``."""
    if ell < 0 or rank < 0:
        raise ValueError("ell and rank must be non-negative")
    Q, cols, rows = _build_Q_cached(int(ell), int(rank))
    return QRotation(int(ell), int(rank), Q.copy(), cols.copy(), rows.copy())


def contract_identity_check(ell, rank):
    """Largest residual of the leading-pair contraction identity.

    Contracting the first two spin indices of Q(sigma tau kappa, a b c)
    with the dot-product metric, weighted by xi^a at degree ell + b + c_bar,
    must give delta(a, -b) xi^b_{ell + c_bar} Q(kappa, c). Only combinations
    whose columns exist at this degree are compared.
    """
    if rank < 2:
        raise ValueError("contraction needs rank >= 2")
    big = build_Q(ell, rank)
    small = build_Q(ell, rank - 2)
    m = 3 ** (rank - 2)
    Qb = big.matrix.reshape(3, 3, m, 3, 3, m)
    cbar = _spin_weights(rank - 2)
    worst = 0.0
    for ia, a in enumerate((-1, 0, 1)):
        for ib, b in enumerate((-1, 0, 1)):
            # sigma = -tau, summed
            lhs_core = Qb[0, 2, :, ia, ib, :] + Qb[1, 1, :, ia, ib, :] + Qb[2, 0, :, ia, ib, :]
            for ic, c in enumerate(multi_indices(rank - 2)):
                col = index_position((a, b) + c)
                if not big.valid_cols[col]:
                    continue
                deg = ell + b + cbar[ic]
                lhs = xi(a, deg) * lhs_core[:, ic]
                rhs = np.zeros(m)
                if a == -b and small.valid_cols[ic]:
                    rhs = xi(b, ell + cbar[ic]) * small.matrix[:, ic]
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


@lru_cache(maxsize=None)
def _degeneracy_table(rank):
    counts = {0: 1}
    for _ in range(rank):
        nxt = {}
        for a, c in counts.items():
            for d in (-1, 0, 1):
                nxt[a + d] = nxt.get(a + d, 0) + c
        counts = nxt
    return counts


def degeneracy(a, rank):
    """Number of rank-``rank`` regularity multi-indices with sum ``a``."""
    if rank < 0:
        raise ValueError("rank must be non-negative")
    return _degeneracy_table(int(rank)).get(int(a), 0)


_U = np.array(
    [
        [0.0, 1 / SQRT2, 1j / SQRT2],
        [1.0, 0.0, 0.0],
        [0.0, 1 / SQRT2, -1j / SQRT2],
    ]
)


@dataclass(frozen=True)
class SpinBasisTransform:
    """Unitary map between coordinate (r, theta, phi) and spin (-, 0, +) bases.

    ``matrix[sigma, c]`` expresses spin basis vector sigma in coordinate
    basis vectors. Component vectors transform with the conjugate.
    """

    rank: int
    matrix: np.ndarray

    def to_spin(self, coord_components):
        """Coordinate components (leading axis 3^rank) -> spin components."""
        return np.tensordot(self.matrix.conj(), coord_components, axes=(1, 0))

    def to_coord(self, spin_components):
        return np.tensordot(self.matrix.T, spin_components, axes=(1, 0))


def spin_basis_transform(rank):
    """Kronecker power of the rank-1 unitary."""
    if rank < 0:
        raise ValueError("rank must be non-negative")
    M = np.ones((1, 1), dtype=complex)
    for _ in range(rank):
        M = np.kron(M, _U)
    return SpinBasisTransform(int(rank), M)
