"""Tour of the ISM band registry and the 433 MHz channel grid."""

from ookmodem.bandplan import DEFAULT_433_GRID, bands_table, channel_freq, lookup, registry

print(bands_table(registry()), end="")
print()
for f in (433.92e6, 868.3e6, 2.45e9, 500e6):
    print(f"{f / 1e6:9.2f} MHz -> {[b.name for b in lookup(f)]}")
print()
for ch in (1, 35, 69):
    print(f"channel {ch:2d}: {channel_freq(DEFAULT_433_GRID, ch) / 1e6:.4f} MHz")
