"""Measurement channels: jump operators, rates and quadrature phases.

Two cavity-coupling schemes produce the same homodyne signal but different
back-action. The asymmetric scheme couples one hop direction to the cavity;
the symmetric scheme couples both. For either, the local-oscillator phase can
be chosen so the measured quadrature c e^{i phi} + c^dag e^{-i phi} equals the
dimensionless current J_links / J on the monitored links; channel constructors
apply that current-matching choice by default.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fock import FockBasis, OperatorMatrix, hop_operator, operator_matrix
from .model import ModelParams, TLSParams, TLS_QUADRATURE_PHASE, build_tls

#: default phase offsets (relative to theta) of the symmetric couplings that
#: make the measured quadrature exactly J_links / J
SYM_PHI_R_OFFSET = 2.0 * np.pi / 3.0
SYM_PHI_L_OFFSET = np.pi / 3.0


@dataclass(frozen=True)
class CqedParams:
    """Effective cavity-QED parameters after adiabatic elimination.

    g_abs and the coupling phases define the Raman coupling; kappa is the
    cavity linewidth. Omega, Delta and gamma_spont parametrize residual
    spontaneous emission of the eliminated excited state.
    """

    g_abs: float
    kappa: float
    phi_g: float = 0.0
    phi_R: float = 0.0
    phi_L: float = 0.0
    Omega: float = 0.0
    Delta: float = 1.0
    gamma_spont: float = 0.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError(f"cavity linewidth must be positive, got {self.kappa}")


@dataclass(frozen=True)
class MeasurementChannel:
    """A dissipation channel: jump operator, rate, quadrature phase, flags.

    ``monitored=False`` marks channels whose output is lost (spontaneous
    emission); the trajectory integrators skip them and only density-matrix
    evolutions include their dissipator.
    """

    jump: OperatorMatrix
    gamma: float
    quad_phase: float = 0.0
    monitored: bool = True
    label: str = ""

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"channel rate must be >= 0, got {self.gamma}")

    def rotated_jump(self) -> np.ndarray:
        """e^{i phi} c, the jump in the measured-quadrature convention."""
        return np.exp(1j * self.quad_phase) * self.jump.dense()

    def quadrature_matrix(self) -> np.ndarray:
        """The observable c e^{i phi} + c^dag e^{-i phi}."""
        rot = self.rotated_jump()
        return rot + rot.conj().T

    def with_rate(self, gamma: float) -> "MeasurementChannel":
        return replace(self, gamma=gamma)


def gamma_from_cqed(c: CqedParams) -> float:
    """Measurement rate 4 |g|^2 / kappa of the eliminated cavity."""
    return 4.0 * c.g_abs ** 2 / c.kappa


def _validate_links(p: ModelParams, link_sites: list[int]) -> list[tuple[int, int]]:
    from .model import _check_link
    if not link_sites:
        raise ValueError("channel needs at least one link")
    return [_check_link(p, j) for j in link_sites]


def asym_channel(basis: FockBasis, p: ModelParams, link_sites: list[int],
                 gamma: float, phi_g: float = 0.0, monitored: bool = True,
                 label: str = "") -> MeasurementChannel:
    """One-directional cavity coupling on the given links.

    The jump is -i e^{i phi_g} sum_j a_j^dag a_{j+1}; with quadrature phase
    theta - phi_g the measured quadrature equals J_links / J.
    """
    pairs = _validate_links(p, link_sites)
    d = basis.dim
    mat = np.zeros((d, d), dtype=complex)
    for a, b in pairs:
        mat += hop_operator(basis, a, b).dense()
    jump = operator_matrix(-1j * np.exp(1j * phi_g) * mat, hermitian=False)
    return MeasurementChannel(
        jump=jump, gamma=gamma, quad_phase=p.theta - phi_g,
        monitored=monitored,
        label=label or f"asym{'-'.join(map(str, link_sites))}")


def sym_channel(basis: FockBasis, p: ModelParams, link_sites: list[int],
                gamma: float, phi_R: float | None = None,
                phi_L: float | None = None, quad_phase: float = 0.0,
                monitored: bool = True, label: str = "") -> MeasurementChannel:
    """Two-directional cavity coupling on the given links.

    The jump is sum_j (i e^{i phi_R} a_j^dag a_{j+1} + i e^{-i phi_L}
    a_{j+1}^dag a_j). When the phases are omitted they default to
    phi_R = theta + 2 pi/3 and phi_L = theta + pi/3 at quadrature phase 0,
    which makes the measured quadrature exactly J_links / J.
    """
    pairs = _validate_links(p, link_sites)
    if phi_R is None:
        phi_R = p.theta + SYM_PHI_R_OFFSET
    if phi_L is None:
        phi_L = p.theta + SYM_PHI_L_OFFSET
    d = basis.dim
    mat = np.zeros((d, d), dtype=complex)
    for a, b in pairs:
        fwd = hop_operator(basis, a, b).dense()
        mat += 1j * np.exp(1j * phi_R) * fwd
        mat += 1j * np.exp(-1j * phi_L) * fwd.conj().T
    jump = operator_matrix(mat, hermitian=False)
    return MeasurementChannel(
        jump=jump, gamma=gamma, quad_phase=quad_phase, monitored=monitored,
        label=label or f"sym{'-'.join(map(str, link_sites))}")


def tls_channel(tls: TLSParams, gamma: float,
                label: str = "tls") -> MeasurementChannel:
    """Global-current measurement channel of the two-well reduction."""
    _, jump, _ = build_tls(tls)
    return MeasurementChannel(jump=jump, gamma=gamma,
                              quad_phase=TLS_QUADRATURE_PHASE,
                              monitored=True, label=label)


def spontaneous_channels(basis: FockBasis, p: ModelParams, c: CqedParams,
                         link_sites: list[int],
                         rate_override: float | None = None,
                         ) -> list[MeasurementChannel]:
    """Unmonitored spontaneous-emission channels for the given links.

    Eliminating the Raman excited state leaves one decay channel per link
    direction (a_j^dag a_{j+1} and its reverse) and one dephasing channel
    n_j per involved site, each at rate (Omega/Delta)^2 gamma_spont unless
    overridden.
    """
    if c.Delta == 0:
        raise ValueError("spontaneous rates require non-zero detuning Delta")
    pairs = _validate_links(p, link_sites)
    rate = ((c.Omega / c.Delta) ** 2 * c.gamma_spont
            if rate_override is None else rate_override)
    channels: list[MeasurementChannel] = []
    for a, b in pairs:
        fwd = hop_operator(basis, a, b)
        channels.append(MeasurementChannel(
            jump=fwd, gamma=rate, monitored=False, label=f"decay{a}<-{b}"))
        channels.append(MeasurementChannel(
            jump=fwd.dag(), gamma=rate, monitored=False, label=f"decay{b}<-{a}"))
    sites = sorted({s for pair in pairs for s in pair})
    for s in sites:
        channels.append(MeasurementChannel(
            jump=hop_operator(basis, s, s), gamma=rate, monitored=False,
            label=f"dephase{s}"))
    return channels
