import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ringmon import SizeLimitError, build_basis, hop_operator, number_operator


def test_dimensions():
    assert build_basis(3, 3).dim == 10
    assert build_basis(1, 7).dim == 1
    assert build_basis(4, 4).dim == 35


def test_rejects_bad_sizes():
    with pytest.raises(ValueError):
        build_basis(0, 3)
    with pytest.raises(ValueError):
        build_basis(3, -1)
    with pytest.raises(SizeLimitError):
        build_basis(30, 30)


def test_size_cap_configurable():
    with pytest.raises(SizeLimitError):
        build_basis(3, 3, max_dim=9)
    assert build_basis(3, 3, max_dim=10).dim == 10


@settings(deadline=None, max_examples=25)
@given(st.integers(1, 5), st.integers(0, 5))
def test_basis_enumeration(L, N):
    basis = build_basis(L, N)
    assert basis.dim == comb(N + L - 1, N)
    assert all(sum(occ) == N for occ in basis.states)
    assert len(set(basis.states)) == basis.dim
    # descending lexicographic order, bijective index
    assert list(basis.states) == sorted(basis.states, reverse=True)
    assert all(basis.index_of(occ) == i for i, occ in enumerate(basis.states))


def test_single_particle_hop():
    basis = build_basis(2, 1)  # states (1,0), (0,1)
    op = hop_operator(basis, 1, 2).dense()
    src = basis.basis_state((0, 1))
    dst = basis.basis_state((1, 0))
    assert np.allclose(op @ src, dst)
    assert np.allclose(op @ dst, 0.0)


def test_bosonic_enhancement():
    basis = build_basis(3, 2)
    op = hop_operator(basis, 1, 2).dense()
    out = op @ basis.basis_state((0, 2, 0))
    expected = np.sqrt(2) * basis.basis_state((1, 1, 0))
    assert np.allclose(out, expected)


def test_diagonal_hop_is_number_operator():
    basis = build_basis(2, 2)
    op = hop_operator(basis, 1, 1)
    assert op.hermitian
    diag = np.diag(op.dense()).real
    assert np.allclose(diag, [occ[0] for occ in basis.states])
    # L=2, N=2 ordered (2,0),(1,1),(0,2)
    assert np.allclose(diag, [2, 1, 0])


def test_number_operator_trace_matches_brute_force():
    basis = build_basis(3, 3)
    # independent enumeration of the same sector
    brute = sum(occ[0] for occ in itertools.product(range(4), repeat=3)
                if sum(occ) == 3)
    assert brute == 10
    assert np.isclose(np.trace(number_operator(basis, 1).dense()).real, brute)


def test_site_index_validation():
    basis = build_basis(3, 1)
    with pytest.raises(ValueError):
        hop_operator(basis, 0, 1)
    with pytest.raises(ValueError):
        hop_operator(basis, 1, 4)
    with pytest.raises(ValueError):
        number_operator(basis, 5)


def test_hop_adjoint_pairs():
    basis = build_basis(3, 2)
    for j, k in itertools.permutations(range(1, 4), 2):
        a = hop_operator(basis, j, k).dense()
        b = hop_operator(basis, k, j).dense()
        assert abs(a.conj().T - b).max() < 1e-14


def test_restricted_commutator_algebra():
    # [a_j^dag a_k, n_j] = -a_j^dag a_k for j != k within the N sector
    basis = build_basis(3, 3)
    for j, k in itertools.permutations(range(1, 4), 2):
        hop = hop_operator(basis, j, k).dense()
        n = number_operator(basis, j).dense()
        comm = hop @ n - n @ hop
        assert abs(comm + hop).max() < 1e-12


def test_total_number_is_identity_times_n():
    basis = build_basis(4, 3)
    total = sum(number_operator(basis, j).dense() for j in range(1, 5))
    assert np.allclose(total, 3 * np.eye(basis.dim))
