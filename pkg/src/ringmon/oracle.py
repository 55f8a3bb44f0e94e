"""Independent brute-force references used by the test suite.

These routines deliberately avoid the implementation paths they certify:
diagonalization and kernel computations run on raw arrays, and the
master-equation fixed point assembles its own superoperator from Kronecker
products rather than reusing the integrator's generator. Intended for test
scale only (dimension of the generator at most 400^2).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .fock import OperatorMatrix

EIG_RESIDUAL_TOL = 1e-10
KERNEL_TOL = 1e-10


def _as_array(op) -> np.ndarray:
    if isinstance(op, OperatorMatrix):
        return op.dense()
    return np.asarray(op, dtype=complex)


def dense_eig(H) -> tuple[np.ndarray, np.ndarray]:
    """Full Hermitian eigendecomposition with a residual check."""
    mat = _as_array(H)
    if abs(mat - mat.conj().T).max() > 1e-10:
        raise ValueError("dense_eig expects a Hermitian matrix")
    lam, vecs = np.linalg.eigh(mat)
    residual = abs(mat @ vecs - vecs * lam).max()
    if residual > EIG_RESIDUAL_TOL:
        raise ArithmeticError(f"eigendecomposition residual {residual:.3e}")
    return lam, vecs


def kernel_on_subspace(op, subspace: np.ndarray,
                       tol: float = KERNEL_TOL) -> np.ndarray:
    """Orthonormal basis of the kernel of op restricted to a subspace.

    ``subspace`` holds orthonormal columns; the result's columns live in the
    full space. Singular values below ``tol`` count as zero.
    """
    mat = _as_array(op)
    sub = np.asarray(subspace, dtype=complex)
    if sub.ndim == 1:
        sub = sub[:, None]
    restricted = mat @ sub
    _, svals, vh = np.linalg.svd(restricted, full_matrices=True)
    m = sub.shape[1]
    null_rows = [i for i in range(m) if i >= len(svals) or svals[i] < tol]
    if not null_rows:
        return np.zeros((sub.shape[0], 0), dtype=complex)
    combos = vh.conj().T[:, null_rows]
    return sub @ combos


def _superoperator(H: np.ndarray, jumps: list[tuple[float, np.ndarray]]
                   ) -> np.ndarray:
    """Lindblad generator on row-major vectorized states via Kronecker sums."""
    d = H.shape[0]
    eye = np.eye(d)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for gamma, c in jumps:
        cdc = c.conj().T @ c
        L += gamma * (np.kron(c, c.conj())
                      - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T)))
    return L


class FixedPointNotConverged(ArithmeticError):
    pass


def me_fixed_point(H, channels, residual_tol: float = 1e-8,
                   max_doublings: int = 60) -> np.ndarray:
    """Stationary state of the Lindblad generator from long-time propagation.

    Starts from the maximally mixed state, repeatedly squares the propagator
    over a coarse horizon and Cesaro-averages successive states until the
    generator residual drops below ``residual_tol``.
    """
    Hm = _as_array(H)
    d = Hm.shape[0]
    if d * d > 400 ** 2:
        raise ValueError("generator dimension above the oracle cap")
    jumps = [(ch.gamma, _as_array(ch.jump)) for ch in channels
             if ch.gamma > 0]
    L = _superoperator(Hm, jumps)
    rates = [g * float(abs(c).max()) ** 2 for g, c in jumps]
    scale = max([*rates, float(abs(Hm).max()), 1e-12])
    P = expm(L * (1.0 / scale))
    rho = (np.eye(d) / d).ravel()
    avg = rho.copy()
    for _ in range(max_doublings):
        P = P @ P
        rho = P @ rho
        avg = 0.5 * (avg + rho)
        cand = avg.reshape(d, d)
        cand = 0.5 * (cand + cand.conj().T)
        cand /= np.trace(cand).real
        if np.linalg.norm(L @ cand.ravel()) < residual_tol:
            return cand
        avg = cand.ravel()
    raise FixedPointNotConverged(
        f"no fixed point below residual {residual_tol} after "
        f"{max_doublings} horizon doublings")
