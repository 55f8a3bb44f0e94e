"""Diffusive stochastic Schroedinger equation for homodyne-monitored systems.

One trajectory evolves a conditional wavefunction under the linear
Euler-Maruyama map

    psi' = psi + (-i H - sum_m gamma_m/2 c_m^dag c_m) psi dt
               + sum_m sqrt(gamma_m) e^{i phi_m} c_m psi dq_m,

with measurement increments dq_m = sqrt(gamma_m) x_m dt + dW_m, where
x_m = <c_m e^{i phi_m} + h.c.>_c is the conditional quadrature on the
normalized state and dW_m are independent Wiener increments. The state is
renormalized after each step; sampling dq from the conditional statistics this
way makes the trajectory ensemble average to the Lindblad equation.

Ensembles integrate all trajectories as one batched array. Each trajectory
owns an RNG stream derived from (master_seed, trajectory_index), so results
are bit-identical regardless of batch splitting or thread count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import NumericalAbort
from .fock import OperatorMatrix
from .measure import MeasurementChannel

#: steps integrated per noise draw; invisible in results, tunes memory only
NOISE_CHUNK = 1024

#: hard ceiling and warning level for dt * max(gamma)
DT_GAMMA_LIMIT = 0.01
DT_GAMMA_WARN = 0.001


@dataclass
class SseConfig:
    """Integration grid and RNG provenance for one scenario."""

    dt: float
    t_final: float
    seed: int
    renorm_every: int = 1
    record_stride: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_final <= 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.renorm_every < 1 or self.record_stride < 1:
            raise ValueError("renorm_every and record_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass
class StateVector:
    """Complex amplitudes over a Fock basis, unit norm after public steps."""

    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes / self.norm)


@dataclass
class TrajectoryRecord:
    """Decimated homodyne record and conditional observables of one run.

    ``dq`` holds the summed measurement increments over each recorded
    interval (so window integrals of the raw record are preserved exactly);
    row 0 is the t=0 anchor with zero increment. ``observables`` includes one
    conditional quadrature column ``x_<label>`` per monitored channel and a
    ``norm_drift`` column with the largest pre-renormalization norm deviation
    seen in each interval.
    """

    times: np.ndarray
    dq: np.ndarray
    observables: dict[str, np.ndarray]
    channel_labels: list[str]
    channel_gammas: list[float]
    seed: int
    trajectory_index: int = 0
    dt: float = 0.0
    states: np.ndarray | None = None

    def column(self, name: str) -> np.ndarray:
        return self.observables[name]

    def channel_index(self, channel) -> int:
        if isinstance(channel, int):
            return channel
        return self.channel_labels.index(channel)


def trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent, scheduling-invariant stream for one trajectory."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(0, index)))


def shared_rng(master_seed: int) -> np.random.Generator:
    """Stream for quantities shared by a whole ensemble (initial states)."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(1,)))


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state of the given dimension."""
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def haar_initial(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Ensemble initial-state callable: a fresh Haar state per trajectory."""
    return haar_state(dim, rng)


def _monitored(channels) -> list[MeasurementChannel]:
    mon = [ch for ch in channels if ch.monitored]
    return mon


def _check_dt(cfg: SseConfig, channels) -> None:
    gmax = max((ch.gamma for ch in channels), default=0.0)
    if cfg.dt * gmax > DT_GAMMA_LIMIT:
        raise ValueError(
            f"dt*max(gamma) = {cfg.dt * gmax:.3g} exceeds {DT_GAMMA_LIMIT}")
    if cfg.dt * gmax > DT_GAMMA_WARN:
        warnings.warn(
            f"dt*max(gamma) = {cfg.dt * gmax:.3g} above {DT_GAMMA_WARN}; "
            "statistics may be coarse", stacklevel=3)


def _drift_matrix(H: OperatorMatrix, channels) -> np.ndarray:
    A = -1j * H.dense()
    for ch in _monitored(channels):
        c = ch.jump.dense()
        A = A - 0.5 * ch.gamma * (c.conj().T @ c)
    return A


class _ProbeSet:
    """Named conditional expectations evaluated on normalized batch states."""

    def __init__(self, probes: Mapping[str, object] | None):
        self.names: list[str] = []
        self.kinds: list[str] = []
        self.mats: list[np.ndarray] = []
        for name, target in (probes or {}).items():
            self.names.append(name)
            if isinstance(target, OperatorMatrix):
                self.kinds.append("op")
                self.mats.append(np.ascontiguousarray(target.dense().T))
            elif isinstance(target, StateVector):
                self.kinds.append("overlap")
                self.mats.append(np.conj(target.amplitudes))
            else:
                arr = np.asarray(target)
                if arr.ndim == 1:
                    self.kinds.append("overlap")
                    self.mats.append(np.conj(arr))
                else:
                    self.kinds.append("op")
                    self.mats.append(np.ascontiguousarray(arr.T))

    def evaluate(self, psi: np.ndarray, nrm2: np.ndarray) -> dict[str, np.ndarray]:
        out = {}
        for name, kind, mat in zip(self.names, self.kinds, self.mats):
            if kind == "op":
                vals = np.einsum("md,md->m", psi.conj(), psi @ mat).real / nrm2
            else:
                vals = np.abs(psi @ mat) ** 2 / nrm2
            out[name] = vals
        return out


def _record_steps(n_steps: int, stride: int) -> np.ndarray:
    steps = list(range(stride, n_steps + 1, stride))
    if not steps or steps[-1] != n_steps:
        steps.append(n_steps)
    return np.asarray(steps, dtype=np.int64)


def _integrate_batch(A: np.ndarray, rotated: list[np.ndarray],
                     sqrt_gammas: np.ndarray, psi0: np.ndarray,
                     cfg: SseConfig, draw: Callable[[int], np.ndarray],
                     probe_set: _ProbeSet, label: str = "",
                     keep_states: bool = False):
    """Euler-Maruyama integration of a batch of trajectories.

    ``draw(K)`` must return Wiener increments of shape (M, K, n_ch) with
    variance dt. Returns (times, dq_rec, x_rec, probe_rec, drift_rec, psi).
    """
    M, d = psi0.shape
    n_ch = len(rotated)
    dt = cfg.dt
    n_steps = cfg.n_steps
    rec_steps = _record_steps(n_steps, cfg.record_stride)
    n_rec = len(rec_steps) + 1

    AT = np.ascontiguousarray(A.T)
    CT = [np.ascontiguousarray(c.T) for c in rotated]

    psi = psi0.astype(complex).copy()
    nrm2 = np.einsum("md,md->m", psi.conj(), psi).real

    times = np.empty(n_rec)
    dq_rec = np.zeros((n_rec, M, n_ch))
    x_rec = np.zeros((n_rec, M, n_ch))
    probe_rec = {name: np.zeros((n_rec, M)) for name in probe_set.names}
    drift_rec = np.zeros((n_rec, M))
    state_rec = (np.zeros((n_rec, M, d), dtype=complex) if keep_states
                 else None)

    def flush(slot: int, step: int, drift_acc: np.ndarray) -> None:
        times[slot] = step * dt
        if state_rec is not None:
            state_rec[slot] = psi / np.sqrt(nrm2)[:, None]
        for m in range(n_ch):
            v = psi @ CT[m]
            x_rec[slot, :, m] = 2.0 * np.einsum(
                "md,md->m", psi.conj(), v).real / nrm2
        for name, vals in probe_set.evaluate(psi, nrm2).items():
            probe_rec[name][slot] = vals
        drift_rec[slot] = drift_acc

    flush(0, 0, np.zeros(M))
    slot = 1
    dq_acc = np.zeros((M, n_ch))
    drift_acc = np.zeros(M)
    rec_iter = iter(rec_steps)
    next_rec = next(rec_iter)

    step = 0
    while step < n_steps:
        K = min(NOISE_CHUNK, n_steps - step)
        dW = draw(K)
        for k in range(K):
            step += 1
            vs = []
            x = np.empty((M, n_ch))
            for m in range(n_ch):
                v = psi @ CT[m]
                vs.append(v)
                x[:, m] = 2.0 * np.einsum("md,md->m", psi.conj(), v).real / nrm2
            dq = sqrt_gammas * x * dt + dW[:, k, :]
            dq_acc += dq
            new = psi + dt * (psi @ AT)
            for m in range(n_ch):
                new += (sqrt_gammas[m] * dq[:, m])[:, None] * vs[m]
            psi = new
            nrm2 = np.einsum("md,md->m", psi.conj(), psi).real
            if step % cfg.renorm_every == 0:
                if not np.all(np.isfinite(nrm2)) or np.any(nrm2 <= 0):
                    bad = int(np.argmin(np.nan_to_num(nrm2, nan=-1.0)))
                    raise NumericalAbort(
                        "non-finite amplitudes in trajectory batch",
                        t=step * dt, step=step,
                        label=f"{label}[batch index {bad}]")
                nrm = np.sqrt(nrm2)
                drift_acc = np.maximum(drift_acc, np.abs(nrm - 1.0))
                psi /= nrm[:, None]
                nrm2 = np.ones(M)
            if step == next_rec:
                flush(slot, step, drift_acc)
                drift_acc = np.zeros(M)
                dq_rec[slot] = dq_acc
                dq_acc = np.zeros((M, n_ch))
                slot += 1
                next_rec = next(rec_iter, -1)
    return times, dq_rec, x_rec, probe_rec, drift_rec, psi, state_rec


def _prepare(H: OperatorMatrix, channels, cfg: SseConfig):
    mon = _monitored(channels)
    _check_dt(cfg, mon)
    A = _drift_matrix(H, channels)
    rotated = [ch.rotated_jump() for ch in mon]
    sq = np.array([np.sqrt(ch.gamma) for ch in mon])
    labels = [ch.label or f"ch{m}" for m, ch in enumerate(mon)]
    gammas = [ch.gamma for ch in mon]
    return A, rotated, sq, labels, gammas


def step(state: StateVector, H: OperatorMatrix, channels, dt: float,
         rng: np.random.Generator) -> tuple[StateVector, np.ndarray]:
    """Advance one normalized state by a single dt; returns (state', dq)."""
    mon = _monitored(channels)
    A = _drift_matrix(H, channels)
    psi = state.amplitudes
    vs, xs = [], []
    for ch in mon:
        v = ch.rotated_jump() @ psi
        vs.append(v)
        xs.append(2.0 * np.vdot(psi, v).real)
    dW = rng.normal(0.0, np.sqrt(dt), size=len(mon))
    dq = np.array([np.sqrt(ch.gamma) * x * dt for ch, x in zip(mon, xs)]) + dW
    new = psi + dt * (A @ psi)
    for ch, v, q in zip(mon, vs, dq):
        new = new + np.sqrt(ch.gamma) * q * v
    nrm = np.linalg.norm(new)
    if not np.isfinite(nrm) or nrm == 0:
        raise NumericalAbort("non-finite amplitudes in step", label="step")
    return StateVector(new / nrm), dq


def _batch_records(times, dq_rec, x_rec, probe_rec, drift_rec, labels,
                   gammas, master_seed, indices, dt,
                   state_rec=None) -> list[TrajectoryRecord]:
    records = []
    for row, idx in enumerate(indices):
        obs = {f"x_{lab}": x_rec[:, row, m] for m, lab in enumerate(labels)}
        for name, arr in probe_rec.items():
            obs[name] = arr[:, row]
        obs["norm_drift"] = drift_rec[:, row]
        records.append(TrajectoryRecord(
            times=times.copy(), dq=dq_rec[:, row, :].copy(),
            observables=obs, channel_labels=list(labels),
            channel_gammas=list(gammas), seed=master_seed,
            trajectory_index=idx, dt=dt,
            states=None if state_rec is None else state_rec[:, row].copy()))
    return records


def simulate_trajectory(H: OperatorMatrix, channels, psi0,
                        cfg: SseConfig,
                        probes: Mapping[str, object] | None = None,
                        trajectory_index: int = 0,
                        keep_states: bool = False) -> TrajectoryRecord:
    """Integrate one conditional trajectory; deterministic in (seed, index)."""
    records = simulate_ensemble(H, channels, cfg, n_traj=1, initial=psi0,
                                probes=probes,
                                first_index=trajectory_index,
                                keep_states=keep_states)
    return records[0]


def _fixed_initial(initial) -> np.ndarray:
    if isinstance(initial, StateVector):
        base = initial.amplitudes
    else:
        base = np.asarray(initial, dtype=complex)
    return base / np.linalg.norm(base)


def simulate_ensemble(H: OperatorMatrix, channels, cfg: SseConfig,
                      n_traj: int, initial,
                      probes: Mapping[str, object] | None = None,
                      threads: int = 1,
                      first_index: int = 0,
                      keep_states: bool = False) -> list[TrajectoryRecord]:
    """Integrate n_traj independent trajectories.

    ``initial`` is a fixed amplitude vector / StateVector shared by the whole
    ensemble, or a callable (rng, dim) -> amplitudes evaluated on each
    trajectory's own stream (used for random initial states). Results are
    independent of ``threads`` and of how the batch is split.
    """
    A, rotated, sq, labels, gammas = _prepare(H, channels, cfg)
    probe_set = _ProbeSet(probes)
    fixed = None if callable(initial) else _fixed_initial(initial)
    dim = A.shape[0]

    def run_block(lo: int, hi: int) -> list[TrajectoryRecord]:
        gens = [trajectory_rng(cfg.seed, first_index + i)
                for i in range(lo, hi)]
        if fixed is None:
            # each trajectory draws its initial state from its own stream,
            # then the same stream continues as the noise source
            rows = [np.asarray(initial(g, dim), dtype=complex) for g in gens]
            block_psi0 = np.stack(rows)
            block_psi0 /= np.linalg.norm(block_psi0, axis=1, keepdims=True)
        else:
            block_psi0 = np.tile(fixed, (hi - lo, 1))
        sdt = np.sqrt(cfg.dt)
        n_ch = len(rotated)

        def draw(K: int) -> np.ndarray:
            block = np.empty((hi - lo, K, n_ch))
            for r, g in enumerate(gens):
                block[r] = g.normal(0.0, sdt, size=(K, n_ch))
            return block

        out = _integrate_batch(A, rotated, sq, block_psi0, cfg, draw,
                               probe_set, label=f"traj[{lo}:{hi}]",
                               keep_states=keep_states)
        times, dq_rec, x_rec, probe_rec, drift_rec, _, state_rec = out
        return _batch_records(times, dq_rec, x_rec, probe_rec, drift_rec,
                              labels, gammas, cfg.seed,
                              range(first_index + lo, first_index + hi),
                              cfg.dt, state_rec)

    if threads <= 1 or n_traj == 1:
        return run_block(0, n_traj)
    from concurrent.futures import ThreadPoolExecutor
    bounds = np.linspace(0, n_traj, threads + 1).astype(int)
    blocks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])
              if b > a]
    with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
        parts = list(pool.map(lambda ab: run_block(*ab), blocks))
    records: list[TrajectoryRecord] = []
    for part in parts:
        records.extend(part)
    return records


def strong_convergence(H: OperatorMatrix, channels, psi0,
                       dts: list[float], t_final: float, n_traj: int,
                       master_seed: int, ref_refine: int = 4):
    """Strong-error slope of the integrator across dt halvings.

    All dt levels are driven by the same Brownian paths (generated at the
    reference resolution and aggregated), and errors are measured against the
    reference solution as sqrt(1 - fidelity^2), averaged over trajectories.
    Returns (errors, slope of log2 error vs log2 dt).
    """
    dts = sorted(dts, reverse=True)
    dt_ref = min(dts) / ref_refine
    n_fine = int(round(t_final / dt_ref))
    for dt in dts:
        ratio = dt / dt_ref
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("dt levels must be integer multiples of the "
                             "reference step")
    A, rotated, sq, _, _ = _prepare(
        H, channels, SseConfig(dt=dt_ref, t_final=t_final, seed=master_seed))
    n_ch = len(rotated)
    base = np.asarray(psi0, dtype=complex)
    base = base / np.linalg.norm(base)
    psi_b = np.tile(base, (n_traj, 1))

    fine = np.empty((n_traj, n_fine, n_ch))
    for i in range(n_traj):
        g = trajectory_rng(master_seed, i)
        fine[i] = g.normal(0.0, np.sqrt(dt_ref), size=(n_fine, n_ch))

    def run(dt: float, noise: np.ndarray) -> np.ndarray:
        cfg = SseConfig(dt=dt, t_final=t_final, seed=master_seed,
                        record_stride=max(1, int(round(t_final / dt))))
        cursor = [0]

        def draw(K: int) -> np.ndarray:
            block = noise[:, cursor[0]:cursor[0] + K, :]
            cursor[0] += K
            return block

        out = _integrate_batch(A, rotated, sq, psi_b, cfg, draw, _ProbeSet(None))
        return out[5]

    psi_ref = run(dt_ref, fine)
    psi_ref /= np.linalg.norm(psi_ref, axis=1, keepdims=True)
    errors = []
    for dt in dts:
        r = int(round(dt / dt_ref))
        agg = fine.reshape(n_traj, n_fine // r, r, n_ch).sum(axis=2)
        psi_dt = run(dt, agg)
        psi_dt /= np.linalg.norm(psi_dt, axis=1, keepdims=True)
        fid = np.abs(np.einsum("md,md->m", psi_dt.conj(), psi_ref))
        err = np.sqrt(np.maximum(1.0 - fid ** 2, 0.0))
        errors.append(float(err.mean()))
    slope = np.polyfit(np.log2(dts), np.log2(errors), 1)[0]
    return np.asarray(errors), float(slope)
