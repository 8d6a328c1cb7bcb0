"""Averaged power spectra, peak finding and SNR estimation.

Normalization: each segment is Hann windowed and transformed, and bin power
is ``|X[k]|**2 / sum(w)**2``. A full-scale complex exponential centered on a
bin therefore reads 0 dB, and white noise of variance ``s2`` reads
``s2 * W / N`` per bin, where ``W = N * sum(w**2) / sum(w)**2`` is the
window's equivalent noise bandwidth in bins (1.5 for Hann). Powers below
1e-20 are clamped, so the dB floor is -200 dB.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import gamma

from .iq import IQBuffer

DB_FLOOR = -200.0
_LIN_FLOOR = 10 ** (DB_FLOOR / 10)


def hann(n: int) -> np.ndarray:
    """Periodic Hann window."""
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


def noise_bandwidth_bins(n: int) -> float:
    w = hann(n)
    return n * float(np.sum(w**2)) / float(np.sum(w)) ** 2


def to_db(p):
    return 10 * np.log10(np.maximum(p, _LIN_FLOOR))


def _is_pow2(n) -> bool:
    return int(n) == n and n >= 1 and (int(n) & (int(n) - 1)) == 0


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    bin_freqs_hz: np.ndarray
    power_db: np.ndarray
    fft_size: int
    segments_averaged: int
    sample_rate_hz: float
    center_freq_hz: float = 0.0
    segment_powers: np.ndarray | None = None

    @property
    def bin_width_hz(self) -> float:
        return self.sample_rate_hz / self.fft_size

    @property
    def power_linear(self) -> np.ndarray:
        return 10 ** (self.power_db / 10)

    @property
    def noise_bandwidth_bins(self) -> float:
        return noise_bandwidth_bins(self.fft_size)


def _segment_powers(x: np.ndarray, n: int) -> np.ndarray:
    w = hann(n)
    segs = x.reshape(-1, n) * w
    spec = np.fft.fftshift(np.fft.fft(segs, axis=1), axes=1)
    return np.abs(spec) ** 2 / np.sum(w) ** 2


def bin_frequencies(n: int, sample_rate_hz: float, center_freq_hz: float = 0.0) -> np.ndarray:
    k = np.arange(n)
    return center_freq_hz + (k - n // 2) * sample_rate_hz / n


def power_spectrum(buffer: IQBuffer, fft_size: int, segments: int | None = None) -> PowerSpectrum:
    """Average of ``segments`` non-overlapping Hann-windowed periodograms.

    ``segments=None`` uses every whole segment in the buffer. Segment powers
    are summed in time order, so the result never depends on evaluation order.
    """
    if not _is_pow2(fft_size):
        raise ValueError(f"fft size must be a power of two, got {fft_size}")
    n = int(fft_size)
    available = len(buffer) // n
    if available < 1:
        raise ValueError(f"buffer of {len(buffer)} samples is shorter than fft size {n}")
    if segments is None:
        segments = available
    if not 1 <= segments <= available:
        raise ValueError(f"segments must lie in [1, {available}], got {segments}")
    p = _segment_powers(buffer.samples[: segments * n], n)
    acc = np.zeros(n)
    for row in p:
        acc += row
    acc /= segments
    return PowerSpectrum(
        bin_frequencies(n, buffer.sample_rate_hz, buffer.center_freq_hz),
        to_db(acc), n, int(segments), buffer.sample_rate_hz, buffer.center_freq_hz, p,
    )


@dataclass(frozen=True)
class Peak:
    freq_hz: float
    power_db: float
    bin: int


def find_peak(spec: PowerSpectrum) -> Peak:
    """Strongest bin refined by a parabola through the dB values of its neighbours.

    Ties go to the lowest frequency. Edge bins are not interpolated.
    """
    p = spec.power_db
    if len(p) == 0:
        raise ValueError("empty spectrum")
    k = int(np.argmax(p))
    freq = float(spec.bin_freqs_hz[k])
    power = float(p[k])
    if 0 < k < len(p) - 1:
        a, b, c = p[k - 1], p[k], p[k + 1]
        denom = a - 2 * b + c
        if denom < 0:
            delta = 0.5 * (a - c) / denom
            freq += delta * spec.bin_width_hz
            power = float(b - 0.25 * (a - c) * delta)
    return Peak(freq, power, k)


@dataclass(frozen=True)
class SnrEstimate:
    snr_db: float
    signal_power: float
    noise_power: float
    peak: Peak
    distinct_peak: bool


def median_bias(segments: int) -> float:
    """Median/mean ratio of a bin power averaged over ``segments`` periodograms."""
    return float(gamma.median(segments) / segments)


def quiet_segments(spec: PowerSpectrum, ratio: float = 1.25) -> np.ndarray:
    """Linear powers of the segments whose total power is within ``ratio`` of the quietest.

    For bursty signals these are the idle stretches between transmissions;
    for a continuous signal every segment qualifies.
    """
    if spec.segment_powers is None:
        return spec.power_linear[None, :]
    totals = spec.segment_powers.sum(axis=1)
    return spec.segment_powers[totals <= ratio * totals.min()]


def estimate_snr(spec: PowerSpectrum, signal_halfwidth_bins: int = 3,
                 on_fraction: float = 1.0) -> SnrEstimate:
    """Signal-to-noise ratio of the strongest spectral component.

    The noise floor is the median bin power outside the peak +/- halfwidth
    region, taken over the quietest segments (see :func:`quiet_segments`) and
    corrected for the median's bias under averaging. Keyed pulses splatter
    across the whole band, so for OOK only the idle segments show the true
    floor. Both powers are referred to the full sample bandwidth, so the
    result compares directly with a per-sample SNR:

    * noise power = floor * N / W (noise summed over all N bins)
    * signal power = (total power - noise power) / on_fraction

    ``on_fraction`` is the share of samples during which the carrier is keyed
    on; with the default of 1 the ratio is mean signal power over noise
    power. If the peak region does not stand clear of the floor, the estimate
    is reported as 0 dB with ``distinct_peak=False``.
    """
    h = int(signal_halfwidth_bins)
    n = spec.fft_size
    if h < 1:
        raise ValueError("signal halfwidth must be >= 1 bin")
    if n < 8 * h:
        raise ValueError(f"spectrum needs at least {8 * h} bins for halfwidth {h}")
    if not 0 < on_fraction <= 1:
        raise ValueError("on_fraction must lie in (0, 1]")
    p = spec.power_linear
    peak = find_peak(spec)
    if np.all(spec.power_db == spec.power_db[0]):
        return SnrEstimate(0.0, 0.0, float(p[0]) * n / spec.noise_bandwidth_bins, peak, False)
    k = peak.bin
    region = np.zeros(n, dtype=bool)
    region[max(k - h, 0): k + h + 1] = True
    quiet = quiet_segments(spec)
    floor = float(np.median(quiet.mean(axis=0)[~region])) / median_bias(len(quiet))
    ebw = spec.noise_bandwidth_bins
    noise = floor * n / ebw
    excess = float(np.sum(p[region])) / (region.sum() * floor) if floor > 0 else np.inf
    # chance excursions of an averaged floor shrink as 1/sqrt(segments)
    distinct = excess > 1 + 6 / np.sqrt(spec.segments_averaged)
    signal = (float(np.sum(p)) / ebw - noise) / on_fraction
    if not distinct or signal <= 0:
        return SnrEstimate(0.0, max(signal, 0.0), noise, peak, False)
    if noise <= 0:
        return SnrEstimate(float("inf"), signal, noise, peak, True)
    return SnrEstimate(float(10 * np.log10(signal / noise)), signal, noise, peak, True)


def waterfall(buffer: IQBuffer, fft_size: int, avg: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Spectrum per time slice of ``avg`` segments, in dB.

    Returns ``(bin_freqs_hz, rows)`` with one row per slice.
    """
    if not _is_pow2(fft_size):
        raise ValueError(f"fft size must be a power of two, got {fft_size}")
    n = int(fft_size)
    slices = len(buffer) // (n * avg)
    if slices < 1:
        raise ValueError("buffer shorter than one waterfall slice")
    p = _segment_powers(buffer.samples[: slices * n * avg], n)
    rows = p.reshape(slices, avg, n).mean(axis=1)
    return bin_frequencies(n, buffer.sample_rate_hz, buffer.center_freq_hz), to_db(rows)


def write_spectrum_csv(spec: PowerSpectrum, path) -> None:
    """``freq_hz,power_db`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", "power_db"])
        for f, p in zip(spec.bin_freqs_hz, spec.power_db):
            w.writerow([repr(float(f)), repr(float(p))])


def write_waterfall_csv(freqs, rows, path) -> None:
    """Header of bin frequencies, then one dB row per time slice."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([repr(float(f)) for f in freqs])
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def keyed_fraction(levels, fft_size: int, segments: int) -> float:
    """Share of keyed samples as seen through the Hann-weighted segments."""
    n = int(fft_size)
    on = np.asarray(levels, dtype=float)[: segments * n].reshape(segments, n)
    w2 = hann(n) ** 2
    return float(np.sum(on * w2) / (segments * np.sum(w2)))


@dataclass(frozen=True, eq=False)
class Analysis:
    spectrum: PowerSpectrum
    peak: Peak
    snr: SnrEstimate
    on_fraction: float


def analyze(buffer: IQBuffer, fft_size: int, segments: int | None = None,
            signal_halfwidth_bins: int = 3) -> Analysis:
    """Spectrum, peak and on-state SNR of a captured burst.

    The keyed fraction comes from the OOK receive chain; when it finds no
    signal the carrier is treated as continuously on.

    The noise floor is only visible in segments that fall wholly inside idle
    time, so ``fft_size`` should be at most about half the shortest gap
    between bursts. Longer segments always contain pulse edges, whose
    splatter then reads as noise and the SNR comes out low.
    """
    from .demod import keyed_levels
    from .errors import NoSignalError

    spec = power_spectrum(buffer, fft_size, segments)
    try:
        on = keyed_fraction(keyed_levels(buffer), spec.fft_size, spec.segments_averaged)
    except NoSignalError:
        on = 1.0
    on = min(max(on, 1.0 / (spec.fft_size * spec.segments_averaged)), 1.0)
    snr = estimate_snr(spec, signal_halfwidth_bins, on)
    return Analysis(spec, snr.peak, snr, on)
