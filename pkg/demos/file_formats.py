"""Write one burst in every raw I/Q format and read it back."""

import tempfile
from pathlib import Path

import numpy as np

from ookmodem.codebook import ETEKCITY_ON
from ookmodem.iq import IQFormat, read_iq, write_iq
from ookmodem.modulator import ModulationConfig, modulate

FS = 1e6
buf = modulate(ETEKCITY_ON, ModulationConfig(amplitude=0.8, carrier_offset_hz=50_000.0), FS)

with tempfile.TemporaryDirectory() as tmp:
    for fmt in IQFormat:
        path = Path(tmp) / f"on.{fmt.value}"
        write_iq(buf, path, fmt)
        back = read_iq(path, fmt, FS)
        err = np.max(np.abs(back.samples - buf.samples))
        print(f"{fmt.value:5s} {path.stat().st_size:8d} bytes  max error {err:.2e}")
