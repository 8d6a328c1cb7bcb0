"""Complex baseband buffers and raw I/Q file input/output.

Three headerless capture formats are supported:

* ``CU8``    interleaved unsigned bytes, decoded as ``(v - 127.5) / 127.5``
* ``CS16LE`` interleaved little-endian int16, decoded as ``v / 32768``
* ``CF32LE`` interleaved little-endian float32, taken verbatim

The CU8 zero point is 127.5 rather than 127 so that silence carries no DC
offset into envelope detection. Sample rate and center frequency are never
stored in the file and must be supplied by the caller.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass

import numpy as np

from .errors import IQFormatError


class IQFormat(enum.Enum):
    CU8 = "cu8"
    CS16LE = "cs16"
    CF32LE = "cf32"

    @property
    def component_size(self) -> int:
        return {"cu8": 1, "cs16": 2, "cf32": 4}[self.value]

    @property
    def sample_size(self) -> int:
        return 2 * self.component_size

    @property
    def step(self) -> float:
        """Quantization step of one component (0 for float32)."""
        return {"cu8": 1 / 127.5, "cs16": 1 / 32768, "cf32": 0.0}[self.value]

    @classmethod
    def parse(cls, name: str | IQFormat) -> IQFormat:
        if isinstance(name, IQFormat):
            return name
        key = name.lower()
        aliases = {"cs16le": "cs16", "cf32le": "cf32", "s16": "cs16", "f32": "cf32"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown I/Q format {name!r}") from None


_DTYPES = {
    IQFormat.CU8: np.dtype("u1"),
    IQFormat.CS16LE: np.dtype("<i2"),
    IQFormat.CF32LE: np.dtype("<f4"),
}


@dataclass(frozen=True, eq=False)
class IQBuffer:
    """Immutable complex baseband samples plus out-of-band metadata."""

    samples: np.ndarray
    sample_rate_hz: float
    center_freq_hz: float = 0.0

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if self.center_freq_hz < 0:
            raise ValueError("center frequency must be non-negative")
        s = np.array(self.samples, dtype=np.complex128).reshape(-1)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def replace(self, samples) -> IQBuffer:
        """New buffer with the same metadata and different samples."""
        return IQBuffer(samples, self.sample_rate_hz, self.center_freq_hz)

    def allclose(self, other: IQBuffer, atol: float = 0.0) -> bool:
        return (
            len(self) == len(other)
            and self.sample_rate_hz == other.sample_rate_hz
            and self.center_freq_hz == other.center_freq_hz
            and bool(np.all(np.abs(self.samples - other.samples) <= atol))
        )


def read_iq(path, format, sample_rate_hz: float, center_freq_hz: float = 0.0) -> IQBuffer:
    """Read a raw interleaved I/Q file.

    A trailing partial sample is rejected instead of dropped, since silently
    losing samples would shift every later pulse edge.
    """
    fmt = IQFormat.parse(format)
    if not sample_rate_hz > 0:
        raise ValueError(f"sample rate must be positive, got {sample_rate_hz}")
    size = os.path.getsize(path)  # FileNotFoundError for missing files
    if size % fmt.sample_size:
        raise IQFormatError(
            f"{path}: {size} bytes is not a whole number of {fmt.sample_size}-byte "
            f"{fmt.name} samples (truncated trailing sample)"
        )
    raw = np.fromfile(path, dtype=_DTYPES[fmt])
    if fmt is IQFormat.CU8:
        comp = (raw.astype(np.float64) - 127.5) / 127.5
    elif fmt is IQFormat.CS16LE:
        comp = raw.astype(np.float64) / 32768.0
    else:
        comp = raw.astype(np.float64)
        if not np.all(np.isfinite(comp)):
            raise IQFormatError(f"{path}: non-finite float sample")
    samples = comp[0::2] + 1j * comp[1::2]
    return IQBuffer(samples, sample_rate_hz, center_freq_hz)


def _interleave(samples: np.ndarray) -> np.ndarray:
    out = np.empty(2 * len(samples), dtype=np.float64)
    out[0::2] = samples.real
    out[1::2] = samples.imag
    return out


def write_iq(buffer: IQBuffer, path, format) -> None:
    """Write ``buffer`` as a raw I/Q file.

    Integer formats clamp each component to [-1, 1] and round to the nearest
    code (halves round up).
    """
    fmt = IQFormat.parse(format)
    if not np.all(np.isfinite(buffer.samples)):
        raise ValueError("cannot write non-finite samples")
    comp = _interleave(buffer.samples)
    if fmt is IQFormat.CU8:
        codes = np.floor(np.clip(comp, -1.0, 1.0) * 127.5 + 127.5 + 0.5)
        data = np.clip(codes, 0, 255).astype("u1")
    elif fmt is IQFormat.CS16LE:
        codes = np.floor(np.clip(comp, -1.0, 1.0) * 32768.0 + 0.5)
        data = np.clip(codes, -32768, 32767).astype("<i2")
    else:
        data = comp.astype("<f4")
    with open(path, "wb") as fh:
        fh.write(data.tobytes())


def scale(buffer: IQBuffer, gain: float) -> IQBuffer:
    """Multiply every sample by a positive real gain."""
    if not gain > 0:
        raise ValueError(f"gain must be positive, got {gain}")
    return buffer.replace(buffer.samples * gain)
