"""Dark states of local-current monitoring on commensurate-flux rings.

At flux values where two momentum modes are degenerate, the kinetic
Hamiltonian has an (N+1)-fold degenerate manifold of states built from the
pair. Inside it lives exactly one state annihilated by the one-directional
(asymmetric) local-current jump operator: the unique combination of the pair
modes with zero amplitude on the drain site of the monitored link, condensed
N-fold. When two pairs are degenerate simultaneously (e.g. four sites at
one-eighth flux) each split of the particles between the pairs contributes
one family member, giving N+1 dark states.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from .fock import FockBasis, OperatorMatrix
from .measure import asym_channel
from .model import (ModelParams, momentum_amplitudes, momentum_spectrum,
                    DEGENERACY_TOL)
from .sse import StateVector

TWO_PI = 2.0 * np.pi

#: residual above which an assembled state is rejected as not dark
ANNIHILATION_TOL = 1e-10


@dataclass(frozen=True)
class DarkStateSpec:
    """Recipe for one dark state at a degeneracy point.

    ``pair1`` hosts N - k particles and ``pair2`` (present only when two mode
    pairs are simultaneously degenerate) hosts k. ``coeffs1``/``coeffs2`` are
    the binomial-family coefficients of each factor, c_0 real positive;
    for a single-pair spec ``coefficients`` is the full length-(N+1) list.
    """

    L: int
    N: int
    theta: float
    link_j: int
    k: int
    pair1: tuple[int, int]
    coeffs1: tuple[complex, ...]
    pair2: Optional[tuple[int, int]] = None
    coeffs2: Optional[tuple[complex, ...]] = None

    @property
    def alpha1(self) -> int:
        return self.pair1[0]

    @property
    def alpha2(self) -> int:
        return self.pair1[1]

    @property
    def coefficients(self) -> tuple[complex, ...]:
        if self.pair2 is not None and self.k > 0:
            raise ValueError("multi-pair family has per-factor coefficients; "
                             "use coeffs1/coeffs2")
        return self.coeffs1


def _pair_coefficients(n: int, pair: tuple[int, int], link_j: int,
                       L: int) -> np.ndarray:
    """Binomial coefficients c_x, x = 0..n, of the dark combination.

    c_x / c_0 = (-1)^x binomial(n, x) q^x with q = e^{2 i pi (a1 - a2)(j+1)/L};
    equivalently the state is (A2 - q A1)^n acting on vacuum, the unique
    pair combination with no amplitude on the drain site j+1.
    """
    a1, a2 = pair
    q = np.exp(2j * np.pi * (a1 - a2) * (link_j + 1) / L)
    return np.array([(-1) ** x * comb(n, x) * q ** x for x in range(n + 1)],
                    dtype=complex)


def _degenerate_pairs(L: int, N: int, theta: float,
                      J: float = 1.0) -> list[tuple[tuple[int, int], float]]:
    p = ModelParams(L=L, N=N, J=J, theta=theta, U=0.0, boundary="ring")
    spec = momentum_spectrum(p)
    pairs = []
    for group in spec.degenerate_groups:
        if len(group) == 2:
            pairs.append((tuple(sorted(group)), spec.energy_of(group[0])))
        elif len(group) > 2:
            raise AssertionError(
                "more than two modes share one energy; cosine dispersion "
                "cannot do that")
    pairs.sort(key=lambda item: item[1])
    return pairs


def dark_census(L: int, N: int, theta: float, link_j: int,
                J: float = 1.0) -> list[DarkStateSpec]:
    """All dark states of the single-link asymmetric channel at (theta, link).

    Empty off degeneracy points; one state for a single degenerate pair;
    N+1 family members (k = 0..N in the second pair) when two pairs are
    simultaneously degenerate.
    """
    pairs = _degenerate_pairs(L, N, theta, J)
    if not pairs:
        return []
    if len(pairs) == 1:
        (pair, _), = pairs
        return [DarkStateSpec(L=L, N=N, theta=theta, link_j=link_j, k=0,
                              pair1=pair,
                              coeffs1=tuple(_pair_coefficients(N, pair,
                                                               link_j, L)))]
    (pair1, _), (pair2, _) = pairs
    specs = []
    for k in range(N + 1):
        specs.append(DarkStateSpec(
            L=L, N=N, theta=theta, link_j=link_j, k=k, pair1=pair1,
            coeffs1=tuple(_pair_coefficients(N - k, pair1, link_j, L)),
            pair2=pair2,
            coeffs2=tuple(_pair_coefficients(k, pair2, link_j, L))))
    return specs


def dark_coefficients(spec: DarkStateSpec) -> np.ndarray:
    """Recompute the primary-pair coefficients, validating degeneracy."""
    pairs = [pair for pair, _ in _degenerate_pairs(spec.L, spec.N, spec.theta)]
    if tuple(sorted(spec.pair1)) not in pairs:
        raise ValueError(
            f"modes {spec.pair1} are not degenerate at theta={spec.theta:.6g}")
    return _pair_coefficients(spec.N - spec.k, spec.pair1, spec.link_j, spec.L)


def _apply_creation(amps: dict, coeffs: np.ndarray) -> dict:
    """One application of sum_k coeffs[k] a_k^dag to a state dictionary."""
    out: dict = {}
    for occ, amp in amps.items():
        for site, c in enumerate(coeffs):
            if c == 0:
                continue
            new = list(occ)
            new[site] += 1
            key = tuple(new)
            out[key] = out.get(key, 0.0) + amp * c * np.sqrt(new[site])
    return out


def polynomial_state(basis: FockBasis,
                     factors: list[tuple[np.ndarray, int]]) -> np.ndarray:
    """Normalized state prod_i (sum_k u_ik a_k^dag)^{p_i} |0>.

    The factor powers must add up to the basis particle number.
    """
    total = sum(p for _, p in factors)
    if total != basis.N:
        raise ValueError(
            f"factor powers sum to {total}, basis holds N={basis.N}")
    amps: dict = {(0,) * basis.L: 1.0 + 0.0j}
    for coeffs, power in factors:
        coeffs = np.asarray(coeffs, dtype=complex)
        if len(coeffs) != basis.L:
            raise ValueError("factor length must equal site count")
        for _ in range(power):
            amps = _apply_creation(amps, coeffs)
    vec = np.zeros(basis.dim, dtype=complex)
    for occ, amp in amps.items():
        vec[basis.index_of(occ)] = amp
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise ValueError("polynomial state vanished")
    return vec / nrm


def condensate_state(basis: FockBasis, site_amplitudes: np.ndarray) -> np.ndarray:
    """All N particles condensed in one single-particle orbital."""
    return polynomial_state(basis, [(np.asarray(site_amplitudes), basis.N)])


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    lead = vec[np.argmax(np.abs(vec) > 1e-12)]
    return vec * (abs(lead) / lead)


def _momentum_factor_terms(spec_pair, coeffs, L):
    a1, a2 = spec_pair
    phi1 = momentum_amplitudes(L, a1)
    phi2 = momentum_amplitudes(L, a2)
    return phi1, phi2, np.asarray(coeffs, dtype=complex)


def build_dark_state(basis: FockBasis, spec: DarkStateSpec,
                     verify: bool = True) -> StateVector:
    """Assemble the dark state from its momentum-space coefficients.

    Expands sum_x c_x (A1)^x (A2)^{n-x} per factor pair in the Fock basis,
    fixes the global phase (leading amplitude real positive), and verifies
    annihilation by the link's one-directional jump operator.
    """
    if (basis.L, basis.N) != (spec.L, spec.N):
        raise ValueError("basis does not match spec")
    partials = [_momentum_factor_terms(spec.pair1, spec.coeffs1, spec.L)
                + (spec.N - spec.k,)]
    if spec.pair2 is not None:
        partials.append(_momentum_factor_terms(spec.pair2, spec.coeffs2,
                                               spec.L) + (spec.k,))

    # expand the product of binomial families term by term
    vec = np.zeros(basis.dim, dtype=complex)

    def expand(level: int, factors_so_far: list, weight: complex) -> None:
        nonlocal vec
        if level == len(partials):
            vec += weight * _raw_polynomial(basis, factors_so_far)
            return
        phi1, phi2, cx, n = partials[level]
        for x in range(n + 1):
            expand(level + 1,
                   factors_so_far + [(phi1, x), (phi2, n - x)],
                   weight * cx[x])

    expand(0, [], 1.0 + 0.0j)
    vec /= np.linalg.norm(vec)
    vec = _fix_phase(vec)
    if verify:
        residual = annihilation_residual(basis, spec, vec)
        if residual > ANNIHILATION_TOL:
            raise ValueError(
                f"annihilation residual {residual:.3e} above tolerance; "
                "coefficient phases are inconsistent")
    return StateVector(vec)


def _raw_polynomial(basis: FockBasis, factors) -> np.ndarray:
    """Unnormalized product of creation polynomials applied to vacuum."""
    amps: dict = {(0,) * basis.L: 1.0 + 0.0j}
    for coeffs, power in factors:
        for _ in range(power):
            amps = _apply_creation(amps, np.asarray(coeffs, dtype=complex))
    vec = np.zeros(basis.dim, dtype=complex)
    for occ, amp in amps.items():
        vec[basis.index_of(occ)] = amp
    return vec


def dark_direction(L: int, pair: tuple[int, int], link_j: int) -> np.ndarray:
    """Single-particle orbital in the pair span with no weight on site j+1."""
    a1, a2 = pair
    phi1 = momentum_amplitudes(L, a1)
    phi2 = momentum_amplitudes(L, a2)
    drain = link_j % L  # 0-based index of site j+1
    u = phi2[drain] * phi1 - phi1[drain] * phi2
    nrm = np.linalg.norm(u)
    if nrm < 1e-12:
        raise ValueError("pair has no dark direction on this link")
    return u / nrm


def build_dark_state_realspace(basis: FockBasis,
                               spec: DarkStateSpec) -> StateVector:
    """Independent construction: condense the zero-on-drain-site orbitals.

    Used as a cross-check of the coefficient route; the two must agree up to
    global phase.
    """
    factors = [(dark_direction(spec.L, spec.pair1, spec.link_j),
                spec.N - spec.k)]
    if spec.pair2 is not None:
        factors.append((dark_direction(spec.L, spec.pair2, spec.link_j),
                        spec.k))
    vec = polynomial_state(basis, factors)
    return StateVector(_fix_phase(vec))


def annihilation_residual(basis: FockBasis, spec: DarkStateSpec,
                          vec: np.ndarray) -> float:
    """Norm of the single-link asymmetric jump applied to the state."""
    p = ModelParams(L=spec.L, N=spec.N, J=1.0, theta=spec.theta, U=0.0,
                    boundary="ring")
    ch = asym_channel(basis, p, [spec.link_j], gamma=1.0)
    return float(np.linalg.norm(ch.jump.dense() @ vec))


def degenerate_manifolds(H: OperatorMatrix, tol: float = 1e-9
                         ) -> list[tuple[float, np.ndarray]]:
    """Dense diagonalization grouped into degenerate eigenspaces.

    Returns (energy, orthonormal eigenvector columns) sorted by energy.
    """
    mat = H.dense()
    if abs(mat - mat.conj().T).max() > 1e-10:
        raise ValueError("Hamiltonian must be Hermitian")
    lam, vecs = np.linalg.eigh(mat)
    groups: list[tuple[float, np.ndarray]] = []
    start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[i] - lam[start] > tol:
            groups.append((float(lam[start:i].mean()), vecs[:, start:i]))
            start = i
    return groups
