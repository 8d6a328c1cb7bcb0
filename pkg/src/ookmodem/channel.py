"""Seeded AWGN channel.

Noise generation is pinned down so golden outputs can be reproduced by any
implementation:

1. ``numpy.random.PCG64(seed)`` produces 64-bit outputs; each uniform is
   ``(x >> 11) * 2**-53`` (``Generator.random``), in [0, 1).
2. Uniforms are consumed in pairs ``(u1, u2)``; Box-Muller gives
   ``r = sqrt(-2 ln(1 - u1))`` and noise sample ``k`` is
   ``r cos(2 pi u2) * sigma + 1j * r sin(2 pi u2) * sigma``
   where ``sigma**2`` is half the total noise variance.

So one complex noise sample uses one uniform pair, I gets the cosine branch
and Q the sine branch.

SNR is referenced to mean power over the *on* samples (``|s| > 0``), not the
whole buffer, so the gap length of an OOK burst does not move the noise level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .iq import IQBuffer, scale
from .modulator import apply_carrier_offset

NOISELESS = "noiseless"


def gaussian_pairs(n: int, seed: int) -> np.ndarray:
    """``n`` unit-variance complex Gaussian samples (variance 1 per component)."""
    gen = np.random.Generator(np.random.PCG64(int(seed)))
    u = gen.random(2 * n)
    r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    return r * np.cos(theta) + 1j * r * np.sin(theta)


def on_power(buffer: IQBuffer) -> float:
    """Mean ``|s|**2`` over the nonzero samples."""
    p = np.abs(buffer.samples) ** 2
    on = p > 0
    if not np.any(on):
        raise ValueError("buffer has no nonzero samples; SNR is undefined")
    return float(np.mean(p[on]))


def add_awgn(buffer: IQBuffer, snr_db, seed: int) -> IQBuffer:
    """Add complex white Gaussian noise at ``snr_db`` relative to on-sample power.

    ``snr_db="noiseless"`` returns the buffer unchanged.
    """
    if len(buffer) == 0:
        raise ValueError("cannot add noise to an empty buffer")
    if snr_db == NOISELESS:
        return buffer
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    noise_var = on_power(buffer) / 10 ** (float(snr_db) / 10)
    sigma = np.sqrt(noise_var / 2)
    noise = gaussian_pairs(len(buffer), seed)
    return buffer.replace(buffer.samples + sigma * noise)


@dataclass(frozen=True)
class ChannelConfig:
    snr_db: float | str = NOISELESS
    seed: int = 0
    gain: float = 1.0
    freq_offset_hz: float = 0.0

    def __post_init__(self):
        if not self.gain > 0:
            raise ValueError("gain must be positive")
        if isinstance(self.snr_db, str) and self.snr_db != NOISELESS:
            raise ValueError(f"snr_db must be a number or {NOISELESS!r}")


def apply_channel(buffer: IQBuffer, config: ChannelConfig) -> IQBuffer:
    """Gain, then frequency offset, then AWGN."""
    out = buffer
    if config.gain != 1.0:
        out = scale(out, config.gain)
    if config.freq_offset_hz:
        out = apply_carrier_offset(out, config.freq_offset_hz)
    return add_awgn(out, config.snr_db, config.seed)
