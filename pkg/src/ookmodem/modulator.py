"""Pulse-width OOK modulation at complex baseband.

The transmitted signal is ``A * m(t) * cos(w t)`` with ``m(t)`` a unipolar
0/1 keying waveform. Here it is generated directly at baseband as
``s[n] = A * m[n] * exp(j 2 pi f_off n / fs)``, where ``f_off`` is the
carrier's offset from the buffer's center frequency.

Each bit occupies a fixed symbol period; the bit value sets how long the
carrier stays on at the start of the period (short pulse = 0, long = 1).
Pulses are rectangular. Raised-cosine rolloff only enters through
:func:`occupied_bandwidth`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .iq import IQBuffer

MIN_SAMPLES_PER_UNIT = 10


@dataclass(frozen=True)
class SymbolTiming:
    """Pulse-width symbol timing, all durations in multiples of ``unit_us``.

    Defaults give a 4-unit symbol with 25% duty for a 0 and 75% for a 1,
    a 16-unit gap between frames, and 4 frame repeats.
    """

    unit_us: float = 250.0
    symbol_period_units: int = 4
    short_high_units: int = 1
    long_high_units: int = 3
    inter_frame_gap_units: int = 16
    repeats: int = 4

    def __post_init__(self):
        if not self.unit_us > 0:
            raise ValueError("unit_us must be positive")
        for name in ("symbol_period_units", "short_high_units", "long_high_units",
                     "inter_frame_gap_units", "repeats"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")
        if not self.short_high_units < self.long_high_units < self.symbol_period_units:
            raise ValueError("require short_high_units < long_high_units < symbol_period_units")
        if not self.inter_frame_gap_units > self.symbol_period_units:
            raise ValueError("inter_frame_gap_units must exceed symbol_period_units")

    @property
    def symbol_period_us(self) -> float:
        return self.unit_us * self.symbol_period_units

    def samples_per_unit(self, sample_rate_hz: float) -> float:
        return self.unit_us * 1e-6 * sample_rate_hz


@dataclass(frozen=True)
class ModulationConfig:
    amplitude: float = 1.0
    carrier_offset_hz: float = 0.0
    rolloff: float = 0.0
    timing: SymbolTiming = field(default_factory=SymbolTiming)

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError("rolloff must lie in [0, 1]")

    @property
    def bit_rate_hz(self) -> float:
        return 1e6 / self.timing.symbol_period_us

    @property
    def occupied_bandwidth_hz(self) -> float:
        return occupied_bandwidth(self.rolloff, self.bit_rate_hz)


def validate_bits(bits) -> str:
    """Normalize a bitstring (str or int sequence) to a ``'0'/'1'`` string."""
    if not isinstance(bits, str):
        bits = "".join(str(int(b)) for b in bits)
    if not bits:
        raise ValueError("invalid bitstring: empty")
    if set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring: {bits!r}")
    return bits


def keying_segments(bits: str, timing: SymbolTiming) -> list[tuple[bool, int]]:
    """The on/off schedule for all repeats, as ``(level, units)`` pairs."""
    frame = []
    for b in bits:
        high = timing.long_high_units if b == "1" else timing.short_high_units
        frame.append((True, high))
        frame.append((False, timing.symbol_period_units - high))
    frame.append((False, timing.inter_frame_gap_units))
    return frame * timing.repeats


def keying_waveform(bits, timing: SymbolTiming, sample_rate_hz: float) -> np.ndarray:
    """Unipolar 0/1 keying waveform ``m[n]``.

    Segment edges sit at ``round(t * samples_per_unit)`` for cumulative unit
    time ``t``, so rounding never accumulates past half a sample.
    """
    bits = validate_bits(bits)
    spu = timing.samples_per_unit(sample_rate_hz)
    if spu < MIN_SAMPLES_PER_UNIT * (1 - 1e-9):
        raise ValueError(
            f"sample rate too low: {spu:.3g} samples per unit, need at least "
            f"{MIN_SAMPLES_PER_UNIT}"
        )
    segments = keying_segments(bits, timing)
    units = np.array([u for _, u in segments], dtype=np.int64)
    edges = np.floor(np.concatenate(([0], np.cumsum(units))) * spu + 0.5).astype(np.int64)
    m = np.zeros(edges[-1], dtype=np.float64)
    for (level, _), start, stop in zip(segments, edges[:-1], edges[1:]):
        if level:
            m[start:stop] = 1.0
    return m


def modulate(bits, config: ModulationConfig, sample_rate_hz: float,
             center_freq_hz: float = 0.0) -> IQBuffer:
    """Render ``bits`` as ``repeats`` OOK frames, each followed by the gap."""
    m = keying_waveform(bits, config.timing, sample_rate_hz)
    s = config.amplitude * m.astype(np.complex128)
    buf = IQBuffer(s, sample_rate_hz, center_freq_hz)
    if config.carrier_offset_hz:
        buf = apply_carrier_offset(buf, config.carrier_offset_hz)
    return buf


def occupied_bandwidth(rolloff: float, bit_rate_hz: float) -> float:
    """Raised-cosine occupied bandwidth ``(1 + r) * R`` in Hz."""
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError(f"rolloff must lie in [0, 1], got {rolloff}")
    if not bit_rate_hz > 0:
        raise ValueError(f"bit rate must be positive, got {bit_rate_hz}")
    return (1.0 + rolloff) * bit_rate_hz


def apply_carrier_offset(buffer: IQBuffer, offset_hz: float) -> IQBuffer:
    """Rotate sample ``n`` by ``exp(j 2 pi offset n / fs)``."""
    fs = buffer.sample_rate_hz
    if not abs(offset_hz) < fs / 2:
        raise ValueError(f"offset {offset_hz} Hz is at or beyond Nyquist ({fs / 2} Hz)")
    if offset_hz == 0:
        return buffer
    n = np.arange(len(buffer))
    # reduce the phase in cycles before scaling by 2 pi to keep it exact for long buffers
    cycles = np.mod(n * (offset_hz / fs), 1.0)
    return buffer.replace(buffer.samples * np.exp(2j * np.pi * cycles))
