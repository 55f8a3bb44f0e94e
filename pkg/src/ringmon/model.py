"""Bose-Hubbard ring with synthetic flux: Hamiltonians, currents, and the
two-level reduction.

The kinetic term carries a Peierls phase theta on every hop; on a ring its
single-particle spectrum is E_alpha = -2 J cos(theta - 2 pi alpha / L) with
momentum labels alpha. Degeneracies of that spectrum at commensurate theta are
what later enable dark states of the local-current measurement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .fock import FockBasis, OperatorMatrix, hop_operator, operator_matrix

TWO_PI = 2.0 * np.pi

#: relative tolerance (in units of J) for grouping degenerate mode energies
DEGENERACY_TOL = 1e-9

#: local-oscillator phase that turns the TLS jump quadrature into sqrt(3) sigma_z
TLS_QUADRATURE_PHASE = -np.pi / 2


@dataclass(frozen=True)
class ModelParams:
    """Ring/chain parameters: L sites, N bosons, hop J, flux theta, on-site U."""

    L: int
    N: int
    J: float = 1.0
    theta: float = 0.0
    U: float = 0.0
    boundary: Literal["ring", "open"] = "ring"

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.N < 0:
            raise ValueError(f"N must be >= 0, got {self.N}")
        if self.J < 0 or self.U < 0:
            raise ValueError("J and U must be non-negative")
        if self.boundary == "ring" and self.L < 3:
            raise ValueError("ring boundary requires L >= 3")
        if self.boundary not in ("ring", "open"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)


@dataclass(frozen=True)
class TLSParams:
    """Double-well reduction: well offset h and tunnelling rate omega."""

    h: float
    omega: float

    def __post_init__(self):
        if not (np.isfinite(self.h) and np.isfinite(self.omega)):
            raise ValueError("h and omega must be finite")


@dataclass(frozen=True)
class MomentumSpectrum:
    """Single-particle mode energies on the ring and their degenerate groups."""

    alphas: tuple[int, ...]
    energies: tuple[float, ...]
    degenerate_groups: tuple[tuple[int, ...], ...]
    theta: float
    J: float

    def energy_of(self, alpha: int) -> float:
        return self.energies[self.alphas.index(alpha)]


def links(p: ModelParams) -> list[tuple[int, int]]:
    """Directed nearest-neighbour links (j, j+1) under the boundary rule."""
    if p.boundary == "ring":
        return [(j, j % p.L + 1) for j in range(1, p.L + 1)]
    return [(j, j + 1) for j in range(1, p.L)]


def _check_link(p: ModelParams, j: int) -> tuple[int, int]:
    pairs = {a: (a, b) for a, b in links(p)}
    if j not in pairs:
        raise ValueError(
            f"link {j} invalid for L={p.L} with {p.boundary} boundary")
    return pairs[j]


def build_hamiltonian(basis: FockBasis, p: ModelParams) -> OperatorMatrix:
    """Flux-dressed kinetic term plus on-site interaction U sum n_j(n_j - 1)."""
    if (basis.L, basis.N) != (p.L, p.N):
        raise ValueError(
            f"basis (L={basis.L}, N={basis.N}) does not match params "
            f"(L={p.L}, N={p.N})")
    kin = kinetic_hamiltonian(basis, p)
    occ = basis.occupations_array().astype(float)
    diag = p.U * (occ * (occ - 1)).sum(axis=1)
    mat = kin.dense().copy()
    mat[np.arange(basis.dim), np.arange(basis.dim)] += diag
    return operator_matrix(mat, hermitian=True)


def kinetic_hamiltonian(basis: FockBasis, p: ModelParams) -> OperatorMatrix:
    """The hopping part alone: -J sum_links (e^{i theta} a_j^dag a_{j+1} + h.c.)."""
    phase = np.exp(1j * p.theta)
    d = basis.dim
    mat = np.zeros((d, d), dtype=complex)
    for j, k in links(p):
        hop = hop_operator(basis, j, k).dense()
        mat += -p.J * (phase * hop + np.conj(phase) * hop.conj().T)
    return operator_matrix(mat, hermitian=True)


def local_current(basis: FockBasis, p: ModelParams, j: int) -> OperatorMatrix:
    """Particle current through link (j, j+1).

    Defined so that its expectation is the rate of particle transfer from
    site j to j+1, in energy units that include the hop amplitude J.
    """
    a, b = _check_link(p, j)
    fwd = hop_operator(basis, a, b).dense()
    mat = -p.J * (1j * np.exp(1j * p.theta) * fwd
                  - 1j * np.exp(-1j * p.theta) * fwd.conj().T)
    return operator_matrix(mat, hermitian=True)


def total_current(basis: FockBasis, p: ModelParams) -> OperatorMatrix:
    """Sum of all link currents; commutes with the kinetic Hamiltonian."""
    d = basis.dim
    mat = np.zeros((d, d), dtype=complex)
    for j, _ in links(p):
        mat += local_current(basis, p, j).dense()
    return operator_matrix(mat, hermitian=True)


def momentum_labels(L: int) -> list[int]:
    """Mode labels alpha: 0, +-1, ... (+L/2 included once for even L)."""
    return list(range(-((L - 1) // 2), L // 2 + 1))


def momentum_amplitudes(L: int, alpha: int) -> np.ndarray:
    """Site amplitudes of momentum mode alpha (1-based sites, unit norm)."""
    k = np.arange(1, L + 1)
    return np.exp(-1j * TWO_PI * alpha * k / L) / np.sqrt(L)


def momentum_spectrum(p: ModelParams) -> MomentumSpectrum:
    """Single-particle energies -2J cos(theta - 2 pi alpha/L) and degeneracies."""
    if p.boundary != "ring":
        raise ValueError("momentum analysis requires ring boundary")
    alphas = momentum_labels(p.L)
    energies = [-2.0 * p.J * np.cos(p.theta - TWO_PI * a / p.L) for a in alphas]
    tol = DEGENERACY_TOL * (p.J if p.J > 0 else 1.0)
    order = np.argsort(energies)
    groups: list[list[int]] = []
    for idx in order:
        if groups and abs(energies[idx] - energies[groups[-1][-1]]) <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    deg = tuple(tuple(alphas[i] for i in g) for g in groups)
    return MomentumSpectrum(alphas=tuple(alphas), energies=tuple(energies),
                            degenerate_groups=deg, theta=p.theta, J=p.J)


@dataclass(frozen=True)
class DegeneracyPoint:
    """A flux value where at least one mode pair is degenerate."""

    theta: float
    pairs: tuple[tuple[int, int], ...]


def degeneracy_points(L: int) -> list[DegeneracyPoint]:
    """All theta in [0, 2 pi) where mode pairs degenerate, with their pairs.

    Modes alpha and alpha' share an energy exactly when
    theta = pi (alpha + alpha') / L  (mod pi), so every such theta is an
    integer multiple of pi / L and can be grouped exactly.
    """
    if L < 3:
        raise ValueError("degeneracy analysis requires L >= 3")
    alphas = momentum_labels(L)
    buckets: dict[int, list[tuple[int, int]]] = {}
    for i, a in enumerate(alphas):
        for b in alphas[i + 1:]:
            base = (a + b) % L  # theta * L / pi modulo L
            for m in (0, 1):
                key = base + m * L  # integer in 0..2L-1
                buckets.setdefault(key % (2 * L), []).append(
                    (a, b) if a <= b else (b, a))
    points = [DegeneracyPoint(theta=np.pi * key / L,
                              pairs=tuple(sorted(set(pairs))))
              for key, pairs in buckets.items()]
    points.sort(key=lambda pt: pt.theta)
    return points


def tls_potential(theta: float, phi12: float, phi23: float,
                  J: float, N: int) -> float:
    """Phase-representation kinetic-energy landscape for three sites.

    The relative phases phi12 = phi_1 - phi_2 and phi23 = phi_2 - phi_3 fix
    the third difference phi31 = -(phi12 + phi23).
    """
    phi31 = -(phi12 + phi23)
    total = (np.cos(phi12 + theta) + np.cos(phi23 + theta)
             + np.cos(phi31 + theta))
    return -2.0 * J * N / 3.0 * total


_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)


def build_tls(p: TLSParams) -> tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """Two-level reduction of the deep double well.

    Returns (Hamiltonian h sigma_z + omega sigma_x, jump operator for the
    global-current measurement restricted to the two wells, and sigma_z, the
    current observable up to the constant sqrt(3) J N).

    The jump operator is 1/2 + i sqrt(3)/2 sigma_z; its quadrature at local
    oscillator phase :data:`TLS_QUADRATURE_PHASE` equals sqrt(3) sigma_z with
    no identity offset, so records report the sigma_z component directly.
    """
    ham = operator_matrix(p.h * _SIGMA_Z + p.omega * _SIGMA_X, hermitian=True)
    jump = operator_matrix(0.5 * _ID2 + 1j * (np.sqrt(3) / 2) * _SIGMA_Z,
                           hermitian=False)
    obs = operator_matrix(_SIGMA_Z.copy(), hermitian=True)
    return ham, jump, obs
