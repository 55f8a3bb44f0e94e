import numpy as np
import pytest

from ringmon import (MeasurementChannel, ModelParams, SseConfig, asym_channel,
                     backaction_spectrum, build_basis, build_hamiltonian,
                     demodulate, dwell_fraction, dwell_times, haar_state,
                     increment_spectrum, integrate_window, plateau_labels,
                     simulate_ensemble, simulate_trajectory, snr,
                     total_current, trajectory_rng, transit_times)
from ringmon.fock import operator_matrix
from ringmon.sse import TrajectoryRecord


def _null_channel(dim=2):
    zero = operator_matrix(np.zeros((dim, dim), dtype=complex))
    return MeasurementChannel(jump=zero, gamma=1.0, label="vac")


def _noise_records(n, n_steps=4000, dt=1e-2, seed=10):
    # records whose increments are pure shot noise
    H = operator_matrix(np.zeros((2, 2), dtype=complex), hermitian=True)
    cfg = SseConfig(dt=dt, t_final=n_steps * dt, seed=seed)
    return simulate_ensemble(H, [_null_channel()], cfg, n,
                             np.array([1.0, 0.0]))


def _synthetic_record(dq_column, dt=1e-2):
    n = len(dq_column) + 1
    times = np.arange(n) * dt
    dq = np.zeros((n, 1))
    dq[1:, 0] = dq_column
    return TrajectoryRecord(times=times, dq=dq, observables={},
                            channel_labels=["main"], channel_gammas=[1.0],
                            seed=0, dt=dt)


def test_window_integral_variance_is_window_length():
    recs = _noise_records(4, n_steps=50_000)
    T = 1.0
    vals = [integrate_window(r, "vac", t0, T)
            for r in recs for t0 in np.arange(0.0, 499.0, 10.0)]
    vals = np.asarray(vals)
    n = len(vals)
    assert n >= 200
    sigma_var = T * np.sqrt(2.0 / (n - 1))
    assert abs(vals.var() - T) < 3 * sigma_var


def test_constant_signal_window_mean_and_snr():
    s, dt = 0.7, 1e-2
    rec = _synthetic_record(np.full(1000, s * dt), dt=dt)
    T = 5.0
    assert integrate_window(rec, "main", 0.0, T) == pytest.approx(s * T)
    stats = snr(s_bar=s, window_T=T, S_eta0=0.0)
    assert stats.snr == pytest.approx(T * s * s)
    assert snr(0.0, T, 0.0).snr == 0.0
    assert snr(1.0, 10.0, 0.0).snr == pytest.approx(10.0)


def test_window_bounds_checked():
    rec = _synthetic_record(np.ones(100))
    with pytest.raises(ValueError):
        integrate_window(rec, "main", -0.5, 0.2)
    with pytest.raises(ValueError):
        integrate_window(rec, "main", 0.9, 0.5)
    assert integrate_window(rec, "main", 0.3, 0.0) == 0.0


def test_window_integral_is_linear():
    a = np.random.default_rng(0).normal(size=500)
    b = np.random.default_rng(1).normal(size=500)
    ra, rb = _synthetic_record(a), _synthetic_record(b)
    rc = _synthetic_record(2.0 * a - 3.0 * b)
    got = integrate_window(rc, "main", 0.0, 5.0)
    want = (2.0 * integrate_window(ra, "main", 0.0, 5.0)
            - 3.0 * integrate_window(rb, "main", 0.0, 5.0))
    assert got == pytest.approx(want, rel=1e-12)


def test_demodulated_noise_variance_is_half_window():
    recs = _noise_records(8, n_steps=40_000, seed=77)
    T, freq = 20.0, 7.0
    vals = [demodulate(r, "vac", freq, T, t0=t0)
            for r in recs for t0 in np.arange(0.0, 380.0, 20.0)]
    vals = np.asarray(vals)
    sigma = (T / 2) * np.sqrt(2.0 / (len(vals) - 1))
    assert abs(vals.var() - T / 2) < 3 * sigma


def test_demodulate_zero_window():
    rec = _synthetic_record(np.ones(100))
    assert demodulate(rec, "main", 3.0, 0.0) == 0.0


def test_shot_noise_spectrum_is_flat_unit_density():
    recs = _noise_records(60, n_steps=20_000, seed=5)
    spec = increment_spectrum(recs, "vac")
    dt = 1e-2
    band = np.abs(spec.omega) <= 2 * np.pi * 0.1 / dt
    vals = spec.values[band]
    assert abs(vals.mean() - 1.0) < 0.1
    assert np.abs(vals - 1.0).max() < 0.35  # single-bin scatter


def test_parseval_consistency_on_white_noise():
    recs = _noise_records(60, n_steps=20_000, seed=6)
    dt = 1e-2
    spec = increment_spectrum(recs, "vac")
    rates = np.stack([r.dq[1:, 0] / dt for r in recs])
    var_t = rates.var()
    domega = np.diff(np.sort(spec.omega)).mean()
    var_f = spec.values.sum() * domega / (2 * np.pi)
    assert abs(var_f / var_t - 1.0) < 0.05


def test_backaction_spectrum_requires_ensemble():
    recs = _noise_records(5)
    with pytest.raises(ValueError):
        backaction_spectrum(recs, "vac")
    backaction_spectrum(recs, "vac", min_records=5)


def test_qnd_eigenstate_has_no_backaction_noise():
    basis = build_basis(3, 3)
    p = ModelParams(L=3, N=3, theta=np.pi / 3)
    H = build_hamiltonian(basis, p)
    ch = asym_channel(basis, p, [1, 2, 3], gamma=1.0)
    Jt = total_current(basis, p)
    lam, vecs = np.linalg.eigh(Jt.dense())
    cfg = SseConfig(dt=1e-3, t_final=5.0, seed=41, record_stride=10)
    recs = simulate_ensemble(H, [ch], cfg, 50, vecs[:, 0])
    spec = backaction_spectrum(recs, 0)
    assert np.abs(spec.values).max() < 1e-6


def test_dark_state_quenches_backaction():
    from ringmon import build_dark_state, dark_census
    basis = build_basis(3, 3)
    p = ModelParams(L=3, N=3, theta=np.pi / 3)
    H = build_hamiltonian(basis, p)
    ch = asym_channel(basis, p, [1], gamma=1.0)
    psi = build_dark_state(basis, dark_census(3, 3, np.pi / 3, 1)[0])
    cfg = SseConfig(dt=1e-3, t_final=5.0, seed=43, record_stride=10)
    recs = simulate_ensemble(H, [ch], cfg, 50, psi.amplitudes)
    spec = backaction_spectrum(recs, 0)
    assert spec.at_zero() < 1e-3


def test_collapsing_qubit_has_backaction_noise():
    sz = operator_matrix(np.diag([1.0, -1.0]).astype(complex),
                         hermitian=True)
    H0 = operator_matrix(np.zeros((2, 2), dtype=complex), hermitian=True)
    ch = MeasurementChannel(jump=sz, gamma=1.0, label="z")
    psi0 = np.array([1.0, 1.0]) / np.sqrt(2)
    cfg = SseConfig(dt=1e-3, t_final=2.0, seed=44, record_stride=4)
    recs = simulate_ensemble(H0, [ch], cfg, 80, psi0)
    spec = backaction_spectrum(recs, "z", window=(0.0, 1.5))
    assert spec.at_zero() > 0.05  # regression floor; collapse noise present


def test_plateau_detector_on_synthetic_square_wave():
    rng = np.random.default_rng(3)
    times = np.arange(4000) * 0.01
    clean = np.where((times // 10).astype(int) % 2 == 0, 1.0, -1.0)
    noisy = clean + 0.08 * rng.normal(size=len(times))
    labels = plateau_labels(times, noisy, [-1, 1], smooth_time=0.3)
    assert (labels >= 0).mean() > 0.95
    events = transit_times(times, noisy, [-1, 1], smooth_time=0.3)
    assert len(events) == 3
    dw = dwell_times(times, noisy, [-1, 1], smooth_time=0.3)
    assert np.abs(dw - 10.0).max() < 1.0
    assert dwell_fraction(times, noisy, [-1, 1], smooth_time=0.3,
                          min_dwell=5.0) > 0.95
    # a diffusing signal crosses levels but rarely lingers long enough
    wander = np.cumsum(rng.normal(size=len(times))) * 0.4
    assert dwell_fraction(times, wander, [-1, 1], smooth_time=0.3,
                          min_dwell=5.0) < 0.2
