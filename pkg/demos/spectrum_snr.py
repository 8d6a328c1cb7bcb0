"""Measure the peak frequency and on-state SNR of a noisy OOK burst."""

from ookmodem.channel import add_awgn
from ookmodem.codebook import ETEKCITY_ON
from ookmodem.modulator import ModulationConfig, modulate
from ookmodem.spectrum import analyze

FS = 1e6
CENTER = 433.92e6

clean = modulate(ETEKCITY_ON, ModulationConfig(carrier_offset_hz=100_000.0), FS, CENTER)
for snr in (10.0, 20.0, 30.0, 37.6):
    result = analyze(add_awgn(clean, snr, 0), 1024)
    print(f"configured {snr:5.1f} dB  estimated {result.snr.snr_db:5.1f} dB  "
          f"peak {result.peak.freq_hz / 1e6:.4f} MHz  keyed {result.on_fraction:.2f}")
