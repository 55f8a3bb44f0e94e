"""Number-conserving bosonic Fock space and elementary second-quantized operators.

Everything downstream works in a single total-number sector. The basis
enumerates occupation vectors (n_1, ..., n_L) with fixed sum N, ordered
descending-lexicographically, so operator matrices and every CSV derived from
them are bit-reproducible across runs.

Site indices in the public interface are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import sparse

from .errors import SizeLimitError

#: below this dimension operators are stored dense, above it CSR sparse
DENSE_DIM_LIMIT = 64

#: tolerance for the Hermiticity metadata check
HERMITIAN_TOL = 1e-12

#: default cap on the basis dimension
DEFAULT_MAX_DIM = 100_000


def _occupations_desc(L: int, N: int):
    """Yield occupation tuples of length L summing to N, descending lex order."""
    if L == 1:
        yield (N,)
        return
    for head in range(N, -1, -1):
        for tail in _occupations_desc(L - 1, N - head):
            yield (head, *tail)


@dataclass(frozen=True)
class FockBasis:
    """Ordered basis of the N-particle sector on L sites.

    Attributes
    ----------
    L, N : int
        Site count and total particle number.
    states : tuple of occupation tuples
        All (n_1, ..., n_L) with sum N, descending lexicographic order.
    index : dict
        Inverse map occupation tuple -> basis index.
    """

    L: int
    N: int
    states: tuple[tuple[int, ...], ...]
    index: dict[tuple[int, ...], int] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, occupation) -> int:
        return self.index[tuple(occupation)]

    def occupations_array(self) -> np.ndarray:
        """Occupations as an integer array of shape (dim, L)."""
        return np.asarray(self.states, dtype=np.int64)

    def basis_state(self, occupation) -> np.ndarray:
        """Unit amplitude vector for one occupation configuration."""
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.index_of(occupation)] = 1.0
        return vec


def build_basis(L: int, N: int, max_dim: int = DEFAULT_MAX_DIM) -> FockBasis:
    """Enumerate the number-conserving basis for L sites and N bosons.

    Raises
    ------
    ValueError
        If L < 1 or N < 0.
    SizeLimitError
        If the sector dimension binomial(N+L-1, N) exceeds ``max_dim``.
    """
    if L < 1:
        raise ValueError(f"site count must be >= 1, got L={L}")
    if N < 0:
        raise ValueError(f"particle number must be >= 0, got N={N}")
    dim = comb(N + L - 1, N)
    if dim > max_dim:
        raise SizeLimitError(
            f"basis dimension {dim} exceeds cap {max_dim} for L={L}, N={N}")
    states = tuple(_occupations_desc(L, N))
    assert len(states) == dim
    index = {occ: i for i, occ in enumerate(states)}
    return FockBasis(L=L, N=N, states=states, index=index)


@dataclass(frozen=True)
class OperatorMatrix:
    """Complex matrix on one Fock sector with Hermiticity metadata.

    ``entries`` is a dense ndarray below :data:`DENSE_DIM_LIMIT` and a CSR
    sparse array above it. Instances are immutable after construction and safe
    to share across trajectory workers.
    """

    dim: int
    entries: object = field(repr=False)
    hermitian: bool = False

    def dense(self) -> np.ndarray:
        """Materialize the matrix as a dense complex ndarray."""
        if sparse.issparse(self.entries):
            return np.asarray(self.entries.todense())
        return self.entries

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.dim, self.entries.conj().T.copy()
                              if not sparse.issparse(self.entries)
                              else self.entries.conj().T.tocsr(),
                              self.hermitian)

    def expect(self, psi: np.ndarray):
        """<psi|A|psi> / <psi|psi>; real when the Hermitian flag is set."""
        num = np.vdot(psi, self.entries @ psi)
        den = np.vdot(psi, psi).real
        val = num / den
        return val.real if self.hermitian else val

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.dim, self.entries + other.entries,
                              self.hermitian and other.hermitian)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.dim, self.entries - other.entries,
                              self.hermitian and other.hermitian)

    def __mul__(self, scalar) -> "OperatorMatrix":
        herm = self.hermitian and np.imag(scalar) == 0
        return OperatorMatrix(self.dim, scalar * self.entries, herm)

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.dim, self.entries @ other.entries, False)


def operator_matrix(entries, hermitian: bool = False) -> OperatorMatrix:
    """Wrap a matrix, validating the Hermiticity invariant when flagged."""
    dim = entries.shape[0]
    if entries.shape != (dim, dim):
        raise ValueError(f"operator must be square, got {entries.shape}")
    if hermitian:
        diff = entries - entries.conj().T
        err = abs(diff).max() if not sparse.issparse(diff) else abs(diff).max()
        if err > HERMITIAN_TOL:
            raise ValueError(
                f"hermitian flag set but max |A - A^dag| = {err:.3e}")
    if not sparse.issparse(entries):
        entries = np.asarray(entries, dtype=complex)
        entries.setflags(write=False)
    return OperatorMatrix(dim=dim, entries=entries, hermitian=hermitian)


def _from_coo(basis: FockBasis, rows, cols, vals, hermitian: bool) -> OperatorMatrix:
    d = basis.dim
    if d < DENSE_DIM_LIMIT:
        mat = np.zeros((d, d), dtype=complex)
        np.add.at(mat, (rows, cols), vals)
    else:
        mat = sparse.coo_array((vals, (rows, cols)), shape=(d, d)).tocsr()
    return operator_matrix(mat, hermitian=hermitian)


def _check_site(basis: FockBasis, j: int) -> None:
    if not 1 <= j <= basis.L:
        raise ValueError(f"site index {j} out of range 1..{basis.L}")


def hop_operator(basis: FockBasis, j: int, k: int) -> OperatorMatrix:
    """Matrix of the hop a_j^dag a_k (1-based sites).

    The matrix element <m| a_j^dag a_k |n> equals sqrt(n_j + 1) * sqrt(n_k)
    where m is n with one boson moved from k to j; for j == k this is the
    (diagonal, Hermitian) number operator.
    """
    _check_site(basis, j)
    _check_site(basis, k)
    if j == k:
        diag = basis.occupations_array()[:, j - 1].astype(float)
        idx = np.arange(basis.dim)
        return _from_coo(basis, idx, idx, diag.astype(complex), hermitian=True)
    rows, cols, vals = [], [], []
    jj, kk = j - 1, k - 1
    for col, occ in enumerate(basis.states):
        nk = occ[kk]
        if nk == 0:
            continue
        target = list(occ)
        target[kk] -= 1
        target[jj] += 1
        rows.append(basis.index[tuple(target)])
        cols.append(col)
        vals.append(np.sqrt((occ[jj] + 1) * nk))
    return _from_coo(basis, np.asarray(rows), np.asarray(cols),
                     np.asarray(vals, dtype=complex), hermitian=False)


def number_operator(basis: FockBasis, j: int) -> OperatorMatrix:
    """Diagonal number operator for site j (1-based)."""
    return hop_operator(basis, j, j)
