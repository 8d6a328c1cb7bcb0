"""Decode a capture chunk by chunk, as it would arrive from a receiver."""

from ookmodem.channel import add_awgn
from ookmodem.codebook import ETEKCITY_OFF
from ookmodem.modulator import ModulationConfig, SymbolTiming, modulate
from ookmodem.stream import decode_stream

FS = 1e6
timing = SymbolTiming(unit_us=100)
buf = add_awgn(modulate(ETEKCITY_OFF, ModulationConfig(timing=timing), FS), 15.0, 3)
chunks = (buf.samples[i:i + 4096] for i in range(0, len(buf), 4096))
for frame in decode_stream(chunks, FS, timing):
    print(f"sample {frame.start_sample:7d}: {frame.bits}")
