"""Frame-vote error rate of the receive chain as the channel SNR drops."""

import numpy as np

from ookmodem.channel import add_awgn
from ookmodem.demod import decode
from ookmodem.errors import OokError
from ookmodem.modulator import ModulationConfig, SymbolTiming, modulate

FS = 1e6
FRAMES = 200
timing = SymbolTiming(unit_us=20)
rng = np.random.default_rng(1)

for snr in (15, 10, 7, 5, 3):
    errors = 0
    for seed in range(FRAMES):
        bits = "".join(rng.choice(["0", "1"], size=25))
        buf = add_awgn(modulate(bits, ModulationConfig(timing=timing), FS), snr, seed)
        try:
            errors += decode(buf, timing).voted_bits != bits
        except OokError:
            errors += 1
    print(f"{snr:3d} dB: {errors:3d}/{FRAMES} vote errors")
