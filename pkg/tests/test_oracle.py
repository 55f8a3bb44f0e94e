import numpy as np
import pytest

from ringmon import (MeasurementChannel, ModelParams, asym_channel,
                     build_basis, build_dark_state, build_hamiltonian,
                     dark_census, purity)
from ringmon.fock import operator_matrix
from ringmon.master import pure_density
from ringmon.oracle import dense_eig, kernel_on_subspace, me_fixed_point


def test_dense_eig_single_particle_commensurate():
    basis = build_basis(3, 1)
    H = build_hamiltonian(basis, ModelParams(L=3, N=1, theta=np.pi / 3))
    lam, _ = dense_eig(H)
    assert np.allclose(np.sort(lam), [-1.0, -1.0, 2.0], atol=1e-12)


def test_dense_eig_identity():
    lam, vecs = dense_eig(np.eye(4))
    assert np.allclose(lam, 1.0)
    assert np.allclose(vecs @ vecs.conj().T, np.eye(4))


def test_dense_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        dense_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_three_particle_commensurate_spectrum_pattern():
    # regression for the degeneracy pattern {4,3,2,1} of the kinetic term
    basis = build_basis(3, 3)
    from ringmon.model import kinetic_hamiltonian
    H = kinetic_hamiltonian(basis, ModelParams(L=3, N=3, theta=np.pi / 3))
    lam, _ = dense_eig(H)
    expected = np.sort([-3.0] * 4 + [0.0] * 3 + [3.0] * 2 + [6.0])
    assert np.allclose(np.sort(lam), expected, atol=1e-10)


def test_kernel_of_zero_operator_is_full_subspace():
    sub = np.linalg.qr(np.random.default_rng(0).normal(size=(6, 3)))[0]
    kern = kernel_on_subspace(np.zeros((6, 6)), sub)
    assert kern.shape == (6, 3)


def test_kernel_counts_on_degenerate_manifold():
    from ringmon.darkstate import degenerate_manifolds
    from ringmon.model import kinetic_hamiltonian
    from ringmon import sym_channel
    basis = build_basis(3, 3)
    p = ModelParams(L=3, N=3, theta=np.pi / 3)
    groups = degenerate_manifolds(kinetic_hamiltonian(basis, p))
    _, manifold = max(groups, key=lambda g: g[1].shape[1])
    asym = asym_channel(basis, p, [1], gamma=1.0)
    sym = sym_channel(basis, p, [1], gamma=1.0)
    assert kernel_on_subspace(asym.jump, manifold).shape[1] == 1
    assert kernel_on_subspace(sym.jump, manifold).shape[1] == 0


def test_fixed_point_qubit_decay():
    c = operator_matrix(np.array([[0, 0], [1, 0]], dtype=complex))
    ch = MeasurementChannel(jump=c, gamma=1.0, monitored=False)
    H = operator_matrix(np.zeros((2, 2), dtype=complex), hermitian=True)
    rho = me_fixed_point(H, [ch])
    assert np.allclose(rho, np.diag([0.0, 1.0]), atol=1e-7)


def test_fixed_point_dark_scenario_is_rank_one():
    basis = build_basis(3, 3)
    p = ModelParams(L=3, N=3, theta=np.pi / 3)
    H = build_hamiltonian(basis, p)
    ch = asym_channel(basis, p, [1], gamma=1.0)
    rho = me_fixed_point(H, [ch])
    assert purity(rho) > 1 - 1e-7
    psi = build_dark_state(basis, dark_census(3, 3, np.pi / 3, 1)[0])
    fid = np.vdot(psi.amplitudes, rho @ psi.amplitudes).real
    assert fid > 1 - 1e-7


def test_fixed_point_mixing_scenario_regression():
    # frozen steady-state purity of the no-dark-state flux point
    basis = build_basis(3, 3)
    p = ModelParams(L=3, N=3, theta=np.pi / 2)
    H = build_hamiltonian(basis, p)
    ch = asym_channel(basis, p, [1], gamma=0.5)
    rho = me_fixed_point(H, [ch])
    assert purity(rho) == pytest.approx(0.1268, abs=2e-3)


def test_fixed_point_reports_non_convergence():
    from ringmon.oracle import FixedPointNotConverged
    c = operator_matrix(np.array([[0, 0], [1, 0]], dtype=complex))
    ch = MeasurementChannel(jump=c, gamma=1.0, monitored=False)
    H = operator_matrix(np.zeros((2, 2), dtype=complex), hermitian=True)
    with pytest.raises(FixedPointNotConverged):
        me_fixed_point(H, [ch], max_doublings=1)
