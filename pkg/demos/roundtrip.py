"""Encode the outlet's ON and OFF commands, decode them back and name them."""

from ookmodem.codebook import builtin_etekcity
from ookmodem.demod import decode
from ookmodem.modulator import ModulationConfig, modulate

FS = 1e6

codebook = builtin_etekcity()
for name, bits in codebook.entries.items():
    buf = modulate(bits, ModulationConfig(), FS, 433.92e6)
    report = decode(buf, codebook=codebook)
    print(f"{name:3s} sent {bits}")
    print(f"    got  {report.voted_bits} -> {report.match.name} "
          f"({report.stats.frame_count} frames, unit {report.stats.unit_us:.0f} us)")
