import numpy as np
import pytest

from ringmon import (CqedParams, ModelParams, asym_channel, build_basis,
                     gamma_from_cqed, kinetic_hamiltonian, local_current,
                     number_operator, spontaneous_channels, sym_channel,
                     total_current)


def test_measurement_rate_formula():
    assert gamma_from_cqed(CqedParams(g_abs=1.0, kappa=4.0)) == 1.0
    assert gamma_from_cqed(CqedParams(g_abs=0.0, kappa=1.0)) == 0.0
    assert gamma_from_cqed(CqedParams(g_abs=0.5, kappa=2.0)) == 0.5
    with pytest.raises(ValueError):
        CqedParams(g_abs=1.0, kappa=0.0)


@pytest.fixture
def ring():
    basis = build_basis(3, 3)
    p = ModelParams(L=3, N=3, theta=np.pi / 3)
    return basis, p


def test_asym_global_quadrature_matches_total_current(ring):
    basis, p = ring
    ch = asym_channel(basis, p, [1, 2, 3], gamma=1.0)
    Jt = total_current(basis, p).dense() / p.J
    assert abs(ch.quadrature_matrix() - Jt).max() < 1e-12


def test_asym_single_link_quadrature(ring):
    basis, p = ring
    for phi_g in (0.0, 1.3):
        ch = asym_channel(basis, p, [1], gamma=1.0, phi_g=phi_g)
        J12 = local_current(basis, p, 1).dense() / p.J
        assert abs(ch.quadrature_matrix() - J12).max() < 1e-12


def test_sym_auto_quadrature_matches_current(ring):
    basis, p = ring
    ch = sym_channel(basis, p, [1], gamma=1.0)
    J12 = local_current(basis, p, 1).dense() / p.J
    assert abs(ch.quadrature_matrix() - J12).max() < 1e-12


def test_sym_global_jump_commutes_with_kinetic_term(ring):
    basis, p = ring
    HJ = kinetic_hamiltonian(basis, p).dense()
    for maker in (sym_channel, asym_channel):
        ch = maker(basis, p, [1, 2, 3], gamma=1.0)
        c = ch.jump.dense()
        assert abs(c @ HJ - HJ @ c).max() < 1e-12


def test_single_link_jumps_do_not_commute_with_kinetic_term(ring):
    basis, p = ring
    HJ = kinetic_hamiltonian(basis, p).dense()
    for maker in (sym_channel, asym_channel):
        c = maker(basis, p, [1], gamma=1.0).jump.dense()
        assert np.linalg.norm(c @ HJ - HJ @ c) > 0.1 * p.J


def test_schemes_differ_in_backaction(ring):
    basis, p = ring
    ca = asym_channel(basis, p, [1], gamma=1.0).jump.dense()
    cs = sym_channel(basis, p, [1], gamma=1.0).jump.dense()
    assert np.linalg.norm(ca - cs) > 0.5


def test_two_site_asym_damping_counts_drain_site():
    basis = build_basis(2, 1)
    p = ModelParams(L=2, N=1, theta=0.0, boundary="open")
    ch = asym_channel(basis, p, [1], gamma=1.0, phi_g=0.0)
    c = ch.jump.dense()
    n2 = number_operator(basis, 2).dense()
    assert abs(c.conj().T @ c - n2).max() < 1e-12


def test_invalid_link_rejected(ring):
    basis, p = ring
    with pytest.raises(ValueError):
        asym_channel(basis, p, [4], gamma=1.0)
    with pytest.raises(ValueError):
        sym_channel(basis, p, [], gamma=1.0)
    p_open = ModelParams(L=3, N=3, theta=0.0, boundary="open")
    with pytest.raises(ValueError):
        asym_channel(basis, p_open, [3], gamma=1.0)


def test_negative_rate_rejected(ring):
    basis, p = ring
    with pytest.raises(ValueError):
        asym_channel(basis, p, [1], gamma=-0.1)


def test_spontaneous_channels(ring):
    basis, p = ring
    cq = CqedParams(g_abs=1.0, kappa=1.0, Omega=0.1, Delta=1.0,
                    gamma_spont=1.0)
    channels = spontaneous_channels(basis, p, cq, [1])
    # one decay per direction plus dephasing on both involved sites
    assert len(channels) == 4
    assert all(not ch.monitored for ch in channels)
    assert all(ch.gamma == pytest.approx(0.01) for ch in channels)
    deph = [ch for ch in channels if ch.label.startswith("dephase")]
    for ch in deph:
        mat = ch.jump.dense()
        assert abs(mat - np.diag(np.diag(mat))).max() == 0
        assert abs(mat - mat.conj().T).max() < 1e-14


def test_spontaneous_inert_without_drive(ring):
    basis, p = ring
    cq = CqedParams(g_abs=1.0, kappa=1.0, Omega=0.0, Delta=1.0,
                    gamma_spont=1.0)
    channels = spontaneous_channels(basis, p, cq, [1, 2, 3])
    assert all(ch.gamma == 0.0 for ch in channels)


def test_spontaneous_requires_detuning(ring):
    basis, p = ring
    cq = CqedParams(g_abs=1.0, kappa=1.0, Omega=0.1, Delta=0.0)
    with pytest.raises(ValueError):
        spontaneous_channels(basis, p, cq, [1])
