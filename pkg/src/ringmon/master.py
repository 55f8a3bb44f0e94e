"""Unconditional Lindblad evolution, conditional stochastic master equation,
and purity diagnostics.

The unconditional equation treats every channel, monitored or not, as a plain
dissipator (not reading the record erases the distinction). The stochastic
master equation keeps the Wiener back-action terms for monitored channels and
adds the unmonitored dissipators, which models spontaneous emission alongside
the homodyne measurement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import NumericalAbort
from .fock import OperatorMatrix
from .sse import SseConfig, _record_steps, trajectory_rng

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
EIGEN_TOL = -1e-8

#: minimum eigenvalue below which the deterministic integrator aborts
POSITIVITY_ABORT = -1e-6


@dataclass
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite state."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def validate(self) -> "DensityMatrix":
        h_err = abs(self.entries - self.entries.conj().T).max()
        if h_err > HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian: {h_err:.3e}")
        t_err = abs(np.trace(self.entries) - 1.0)
        if t_err > TRACE_TOL:
            raise ValueError(f"density matrix trace off by {t_err:.3e}")
        lam = np.linalg.eigvalsh(self.entries)
        if lam.min() < EIGEN_TOL:
            raise ValueError(f"negative eigenvalue {lam.min():.3e}")
        return self


def pure_density(psi: np.ndarray) -> np.ndarray:
    """Projector |psi><psi| of a normalized amplitude vector."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def purity(rho) -> float:
    """Tr rho^2: 1 for pure states, 1/d for maximally mixed ones."""
    mat = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(np.einsum("ij,ji->", mat, mat).real)


def trace_distance(rho1, rho2) -> float:
    """(1/2) trace-norm distance between two Hermitian states."""
    a = rho1.entries if isinstance(rho1, DensityMatrix) else np.asarray(rho1)
    b = rho2.entries if isinstance(rho2, DensityMatrix) else np.asarray(rho2)
    lam = np.linalg.eigvalsh(a - b)
    return float(0.5 * np.abs(lam).sum())


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.entries
    return np.asarray(rho, dtype=complex)


def lindblad_rhs(rho, H: OperatorMatrix, channels) -> np.ndarray:
    """Generator of the unconditional evolution applied to rho.

    All channels contribute gamma (c rho c^dag - 1/2 {c^dag c, rho});
    monitored and unmonitored channels enter identically.
    """
    mat = _as_matrix(rho)
    Hd = H.dense()
    if mat.shape != Hd.shape:
        raise ValueError(
            f"dimension mismatch: rho {mat.shape} vs H {Hd.shape}")
    out = -1j * (Hd @ mat - mat @ Hd)
    for ch in channels:
        c = ch.jump.dense()
        cr = c @ mat
        cdc = c.conj().T @ c
        out += ch.gamma * (cr @ c.conj().T
                           - 0.5 * (cdc @ mat + mat @ cdc))
    return out


def build_liouvillian(H: OperatorMatrix, channels) -> np.ndarray:
    """Dense matrix of the generator acting on row-major vectorized states."""
    d = H.dim
    L = np.empty((d * d, d * d), dtype=complex)
    basis = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            basis[i, j] = 1.0
            L[:, i * d + j] = lindblad_rhs(basis, H, channels).ravel()
            basis[i, j] = 0.0
    return L


@dataclass
class MasterRecord:
    """Decimated unconditional evolution: states, purity, probe expectations."""

    times: np.ndarray
    rhos: np.ndarray
    purity: np.ndarray
    observables: dict[str, np.ndarray]
    hermiticity_correction: float

    def final(self) -> DensityMatrix:
        return DensityMatrix(self.rhos[-1])


def _probe_values(probes: Mapping[str, OperatorMatrix] | None,
                  rho: np.ndarray) -> dict[str, float]:
    out = {}
    for name, op in (probes or {}).items():
        out[name] = float(np.einsum("ij,ji->", op.dense(), rho).real)
    return out


def evolve_master(rho0, H: OperatorMatrix, channels, dt: float,
                  t_final: float, record_stride: int = 1,
                  probes: Mapping[str, OperatorMatrix] | None = None,
                  check_every: int = 100) -> MasterRecord:
    """Classical RK4 integration of the Lindblad equation.

    Hermiticity is restored by symmetrization after every step (the largest
    correction is reported); trace and positivity are re-checked every
    ``check_every`` steps and a violation beyond :data:`POSITIVITY_ABORT`
    aborts with a diagnostic.
    """
    rho = _as_matrix(rho0).copy()
    d = rho.shape[0]
    L = build_liouvillian(H, channels)
    n_steps = int(round(t_final / dt))
    rec_steps = _record_steps(n_steps, record_stride)
    times = np.empty(len(rec_steps) + 1)
    rhos = np.empty((len(rec_steps) + 1, d, d), dtype=complex)
    pur = np.empty(len(rec_steps) + 1)
    obs: dict[str, list[float]] = {name: [] for name in (probes or {})}

    def flush(slot: int, step: int) -> None:
        times[slot] = step * dt
        rhos[slot] = rho
        pur[slot] = purity(rho)
        for name, val in _probe_values(probes, rho).items():
            obs[name].append(val)

    flush(0, 0)
    slot = 1
    correction = 0.0
    y = rho.ravel()
    rec_iter = iter(rec_steps)
    next_rec = next(rec_iter)
    for step in range(1, n_steps + 1):
        k1 = L @ y
        k2 = L @ (y + 0.5 * dt * k1)
        k3 = L @ (y + 0.5 * dt * k2)
        k4 = L @ (y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = y.reshape(d, d)
        sym = 0.5 * (rho + rho.conj().T)
        correction = max(correction, float(abs(rho - sym).max()))
        rho = sym
        y = rho.ravel()
        if step % check_every == 0 or step == n_steps:
            tr = np.trace(rho)
            if not np.isfinite(tr.real):
                raise NumericalAbort("non-finite density matrix",
                                     t=step * dt, step=step, label="master")
            lam_min = float(np.linalg.eigvalsh(rho).min())
            if lam_min < POSITIVITY_ABORT:
                raise NumericalAbort(
                    f"positivity violation {lam_min:.3e}",
                    t=step * dt, step=step, label="master")
        if step == next_rec:
            flush(slot, step)
            slot += 1
            next_rec = next(rec_iter, -1)
    return MasterRecord(times=times, rhos=rhos, purity=pur,
                        observables={k: np.asarray(v) for k, v in obs.items()},
                        hermiticity_correction=correction)


@dataclass
class SmeRecord:
    """One conditional density-matrix trajectory with its homodyne record.

    ``max_trace_drift`` is the largest pre-renormalization trace deviation of
    a single step (it scales like sqrt(dt), as for the wavefunction norm);
    ``max_trace_error`` is the largest deviation of the renormalized states
    actually recorded.
    """

    times: np.ndarray
    dq: np.ndarray
    observables: dict[str, np.ndarray]
    purity: np.ndarray
    channel_labels: list[str]
    channel_gammas: list[float]
    seed: int
    trajectory_index: int = 0
    dt: float = 0.0
    max_trace_drift: float = 0.0
    max_trace_error: float = 0.0
    states: np.ndarray | None = None

    def column(self, name: str) -> np.ndarray:
        return self.observables[name]


def _resolve_rho0(initial, rng: np.random.Generator, dim: int) -> np.ndarray:
    target = initial(rng, dim) if callable(initial) else initial
    if isinstance(target, DensityMatrix):
        return target.entries.copy()
    mat = np.asarray(target, dtype=complex)
    if mat.ndim == 1:
        return pure_density(mat)
    return mat.copy()


def evolve_sme(rho0, H: OperatorMatrix, channels, cfg: SseConfig,
               probes: Mapping[str, OperatorMatrix] | None = None,
               trajectory_index: int = 0) -> SmeRecord:
    """One conditional density-matrix trajectory of the diffusive SME.

    Monitored channels carry the Wiener back-action and produce measurement
    increments dq; unmonitored channels enter only through their dissipator.
    The per-step update uses the Kraus factorization

        rho' = M rho M^dag + sum_unmonitored gamma_s c_s rho c_s^dag dt,
        M = 1 + (-iH - 1/2 sum gamma c^dag c) dt
              + sum_monitored sqrt(gamma_m) e^{i phi_m} c_m dq_m,

    followed by trace renormalization. Expanded to first order in dt this is
    the usual diffusive stochastic master equation, but the factorized form
    keeps the state positive at finite dt and evolves a pure state with no
    unmonitored channels exactly like the wavefunction integrator driven by
    the same noise.
    """
    recs = sme_ensemble(rho0, H, channels, cfg, n_traj=1, probes=probes,
                        first_index=trajectory_index)
    return recs[0]


def sme_ensemble(rho0, H: OperatorMatrix, channels, cfg: SseConfig,
                 n_traj: int,
                 probes: Mapping[str, OperatorMatrix] | None = None,
                 first_index: int = 0,
                 keep_states: bool = False) -> list[SmeRecord]:
    """Batch of conditional density-matrix trajectories (see evolve_sme)."""
    from .sse import _check_dt
    _check_dt(cfg, channels)
    d = H.dim
    mon = [ch for ch in channels if ch.monitored]
    unmon = [ch for ch in channels if not ch.monitored and ch.gamma > 0]
    rots = [ch.rotated_jump() for ch in mon]
    sg = np.array([np.sqrt(ch.gamma) for ch in mon])
    labels = [ch.label or f"ch{m}" for m, ch in enumerate(mon)]
    n_ch = len(mon)
    dt, n_steps = cfg.dt, cfg.n_steps
    # deterministic Kraus part: all channels damp, only unmonitored refill
    base = np.eye(d, dtype=complex) - 1j * dt * H.dense()
    for ch in channels:
        c = ch.jump.dense()
        base -= 0.5 * dt * ch.gamma * (c.conj().T @ c)
    refill = np.zeros((d * d, d * d), dtype=complex)
    for ch in unmon:
        c = ch.jump.dense()
        refill += ch.gamma * dt * np.kron(c, c.conj())
    refill_T = np.ascontiguousarray(refill.T) if unmon else None
    rec_steps = _record_steps(n_steps, cfg.record_stride)
    n_rec = len(rec_steps) + 1

    gens = [trajectory_rng(cfg.seed, first_index + i) for i in range(n_traj)]
    rho_rows = [_resolve_rho0(rho0, g, d) for g in gens]
    Rho = np.stack(rho_rows)

    times = np.empty(n_rec)
    dq_rec = np.zeros((n_rec, n_traj, n_ch))
    x_rec = np.zeros((n_rec, n_traj, n_ch))
    pur = np.empty((n_rec, n_traj))
    probe_rec = {name: np.empty((n_rec, n_traj)) for name in (probes or {})}
    probe_mats = {name: op.dense() for name, op in (probes or {}).items()}
    state_rec = (np.empty((n_rec, n_traj, d, d), dtype=complex)
                 if keep_states else None)

    trace_err = np.zeros(n_traj)

    def flush(slot: int, step: int) -> None:
        times[slot] = step * dt
        if state_rec is not None:
            state_rec[slot] = Rho
        np.maximum(trace_err,
                   np.abs(np.einsum("mii->m", Rho).real - 1.0),
                   out=trace_err)
        for m, c in enumerate(rots):
            x_rec[slot, :, m] = 2.0 * np.einsum("ij,mji->m", c, Rho).real
        pur[slot] = np.einsum("mij,mji->m", Rho, Rho).real
        for name, P in probe_mats.items():
            probe_rec[name][slot] = np.einsum("ij,mji->m", P, Rho).real

    flush(0, 0)
    slot = 1
    rec_iter = iter(rec_steps)
    next_rec = next(rec_iter)
    dq_acc = np.zeros((n_traj, n_ch))
    max_drift = np.zeros(n_traj)
    sdt = np.sqrt(dt)
    for step in range(1, n_steps + 1):
        dW = np.empty((n_traj, n_ch))
        for r, g in enumerate(gens):
            dW[r] = g.normal(0.0, sdt, size=n_ch)
        M = np.broadcast_to(base, (n_traj, d, d)).copy()
        for m, c in enumerate(rots):
            x = 2.0 * np.einsum("ij,mji->m", c, Rho).real
            dq = sg[m] * x * dt + dW[:, m]
            dq_acc[:, m] += dq
            M += (sg[m] * dq)[:, None, None] * c[None, :, :]
        new = M @ Rho @ np.transpose(M.conj(), (0, 2, 1))
        if refill_T is not None:
            new += (Rho.reshape(n_traj, d * d) @ refill_T).reshape(
                n_traj, d, d)
        Rho = 0.5 * (new + np.transpose(new.conj(), (0, 2, 1)))
        tr = np.einsum("mii->m", Rho).real
        if not np.all(np.isfinite(tr)):
            bad = int(np.argmin(np.nan_to_num(tr, nan=-1.0)))
            raise NumericalAbort("non-finite conditional state",
                                 t=step * dt, step=step,
                                 label=f"sme[batch index {bad}]")
        max_drift = np.maximum(max_drift, np.abs(tr - 1.0))
        Rho /= tr[:, None, None]
        if step == next_rec:
            flush(slot, step)
            dq_rec[slot] = dq_acc
            dq_acc = np.zeros((n_traj, n_ch))
            slot += 1
            next_rec = next(rec_iter, -1)

    records = []
    for r in range(n_traj):
        obs = {f"x_{lab}": x_rec[:, r, m] for m, lab in enumerate(labels)}
        for name, arr in probe_rec.items():
            obs[name] = arr[:, r]
        records.append(SmeRecord(
            times=times.copy(), dq=dq_rec[:, r, :].copy(), observables=obs,
            purity=pur[:, r].copy(), channel_labels=list(labels),
            channel_gammas=[ch.gamma for ch in mon], seed=cfg.seed,
            trajectory_index=first_index + r, dt=dt,
            max_trace_drift=float(max_drift[r]),
            max_trace_error=float(trace_err[r]),
            states=None if state_rec is None else state_rec[:, r].copy()))
    return records
