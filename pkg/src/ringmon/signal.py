"""Filtering of homodyne records: window integrals, demodulation, noise
spectra, signal-to-noise, and plateau/transit detection.

A record keeps measurement increments dq per output interval, so the boxcar
filter is an exact sum of increments. Spectra are averaged Hann-windowed
periodograms normalized so vacuum shot noise has unit density at every
frequency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as scipy_signal


@dataclass(frozen=True)
class SignalStats:
    """Inputs and result of the boxcar signal-to-noise estimate."""

    window_T: float
    s_bar: float
    S_eta0: float
    S_xi0: float
    snr: float


@dataclass(frozen=True)
class SpectrumEstimate:
    """Averaged periodogram: angular frequencies and two-sided density."""

    omega: np.ndarray
    values: np.ndarray
    n_records: int

    def at_zero(self) -> float:
        return float(self.values[np.argmin(np.abs(self.omega))])


def _window_rows(record, t0: float, T: float) -> np.ndarray:
    times = record.times
    eps = 1e-9 * max(record.dt, 1e-30)
    if T < 0:
        raise ValueError("window length must be non-negative")
    if t0 < times[0] - eps or t0 + T > times[-1] + eps:
        raise ValueError(
            f"window [{t0}, {t0 + T}] outside record [{times[0]}, {times[-1]}]")
    return np.nonzero((times > t0 + eps) & (times <= t0 + T + eps))[0]


def integrate_window(record, channel, t0: float, T: float) -> float:
    """Boxcar filter: the summed measurement increments over [t0, t0+T]."""
    rows = _window_rows(record, t0, T)
    ch = record.channel_index(channel)
    return float(record.dq[rows, ch].sum())


def demodulate(record, channel, frequency: float, T: float,
               t0: float = 0.0, phase: float = 0.0) -> float:
    """Cosine-filtered window integral sum cos(frequency t + phase) dq.

    The filter is evaluated at the left edge of each increment interval
    (non-anticipating convention). ``phase=-pi/2`` gives the sine quadrature.
    """
    rows = _window_rows(record, t0, T)
    if rows.size == 0:
        return 0.0
    ch = record.channel_index(channel)
    left = record.times[rows - 1]
    return float((np.cos(frequency * left + phase)
                  * record.dq[rows, ch]).sum())


def _record_sampling(record) -> float:
    diffs = np.diff(record.times)
    return float(np.median(diffs))


def _select_window(record, window) -> np.ndarray:
    if window is None:
        return np.arange(1, len(record.times))
    lo, hi = window
    rows = np.nonzero((record.times >= lo) & (record.times <= hi))[0]
    return rows[rows > 0]


def _welch(rows_by_record, step: float, n_records: int) -> SpectrumEstimate:
    traces = np.stack(rows_by_record)
    nper = min(traces.shape[1], 256)
    freqs, dens = scipy_signal.welch(
        traces, fs=1.0 / step, window="hann", nperseg=nper,
        detrend=False, return_onesided=False, scaling="density", axis=1)
    order = np.argsort(freqs)
    return SpectrumEstimate(omega=2.0 * np.pi * freqs[order],
                            values=dens.mean(axis=0)[order],
                            n_records=n_records)


def backaction_spectrum(records, channel, mean_signal=None,
                        window=None, min_records: int = 50) -> SpectrumEstimate:
    """Spectrum of the back-action fluctuation around the mean signal.

    The fluctuation is sqrt(gamma) x_c(t) - s(t) per record, with x_c the
    stored conditional quadrature and s(t) either supplied or estimated as
    the ensemble mean. The records must share their time grid and a
    stationarity window should be supplied when the ensemble drifts.
    """
    records = list(records)
    if len(records) < min_records:
        raise ValueError(
            f"need at least {min_records} records, got {len(records)}")
    ch = records[0].channel_index(channel)
    label = records[0].channel_labels[ch]
    root_gamma = np.sqrt(records[0].channel_gammas[ch])
    rows = _select_window(records[0], window)
    signals = [root_gamma * rec.observables[f"x_{label}"][rows]
               for rec in records]
    if mean_signal is None:
        mean = np.mean(signals, axis=0)
    else:
        mean = np.asarray(mean_signal)
        if mean.shape == records[0].times.shape:
            mean = mean[rows]
    etas = [s - mean for s in signals]
    return _welch(etas, _record_sampling(records[0]), len(records))


def increment_spectrum(records, channel, window=None) -> SpectrumEstimate:
    """Spectrum of the raw record rate dq/dt (shot-noise calibration)."""
    records = list(records)
    ch = records[0].channel_index(channel)
    step = _record_sampling(records[0])
    rows = _select_window(records[0], window)
    rates = [rec.dq[rows, ch] / step for rec in records]
    return _welch(rates, step, len(records))


def snr(s_bar: float, window_T: float, S_eta0: float,
        S_xi0: float = 1.0) -> SignalStats:
    """Signal-to-noise of the boxcar filter: T |s_bar|^2 / (S_eta0 + S_xi0)."""
    value = window_T * abs(s_bar) ** 2 / (S_eta0 + S_xi0)
    return SignalStats(window_T=window_T, s_bar=s_bar, S_eta0=S_eta0,
                       S_xi0=S_xi0, snr=value)


def _smooth(values: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return values
    kernel = np.ones(width)
    summed = np.convolve(values, kernel, mode="same")
    counts = np.convolve(np.ones_like(values), kernel, mode="same")
    return summed / counts


def plateau_labels(times: np.ndarray, values: np.ndarray,
                   levels, smooth_time: float = 0.0,
                   enter_frac: float = 0.25,
                   exit_frac: float = 0.5) -> np.ndarray:
    """Hysteretic assignment of each sample to a plateau level or -1.

    A sample locks onto the nearest level when within enter_frac of the
    minimum level gap and stays locked until it strays beyond exit_frac of
    the gap; the hysteresis (exit > enter) prevents chatter at boundaries.
    """
    levels = np.sort(np.asarray(levels, dtype=float))
    if len(levels) < 2:
        raise ValueError("need at least two levels for plateau detection")
    gap = np.diff(levels).min()
    enter, exit_ = enter_frac * gap, exit_frac * gap
    v = values
    if smooth_time > 0:
        step = float(np.median(np.diff(times)))
        v = _smooth(values, max(1, int(round(smooth_time / step))))
    labels = np.full(len(v), -1, dtype=np.int64)
    current = -1
    for i, val in enumerate(v):
        if current >= 0 and abs(val - levels[current]) <= exit_:
            labels[i] = current
            continue
        current = -1
        nearest = int(np.argmin(np.abs(levels - val)))
        if abs(val - levels[nearest]) <= enter:
            current = nearest
            labels[i] = current
    return labels


def _runs(labels: np.ndarray):
    """Maximal runs of constant assigned label as (start, stop, label)."""
    i = 0
    n = len(labels)
    while i < n:
        if labels[i] < 0:
            i += 1
            continue
        j = i
        while j < n and labels[j] == labels[i]:
            j += 1
        yield i, j, labels[i]
        i = j


def dwell_fraction(times, values, levels, smooth_time: float = 0.0,
                   enter_frac: float = 0.25, exit_frac: float = 0.5,
                   min_dwell: float = 0.0) -> float:
    """Fraction of samples locked onto some plateau level.

    With ``min_dwell`` set, locked stretches shorter than that duration do
    not count (a wandering signal crosses levels constantly but rarely
    lingers, so persistence separates plateaus from incidental crossings).
    """
    labels = plateau_labels(times, values, levels, smooth_time,
                            enter_frac, exit_frac)
    if min_dwell <= 0:
        return float((labels >= 0).mean())
    step = float(np.median(np.diff(times)))
    min_len = max(1, int(round(min_dwell / step)))
    locked = sum(stop - start for start, stop, _ in _runs(labels)
                 if stop - start >= min_len)
    return locked / len(labels)


def transit_times(times, values, levels, smooth_time: float = 0.0,
                  enter_frac: float = 0.25,
                  exit_frac: float = 0.5) -> np.ndarray:
    """Times at which the locked plateau level changes."""
    labels = plateau_labels(times, values, levels, smooth_time,
                            enter_frac, exit_frac)
    events = []
    last = -1
    for i, lab in enumerate(labels):
        if lab < 0:
            continue
        if last >= 0 and lab != last:
            events.append(times[i])
        last = lab
    return np.asarray(events)


def dwell_times(times, values, levels, **kwargs) -> np.ndarray:
    """Durations between consecutive transits, including the end segments."""
    events = transit_times(times, values, levels, **kwargs)
    bounds = np.concatenate([[times[0]], events, [times[-1]]])
    return np.diff(bounds)
