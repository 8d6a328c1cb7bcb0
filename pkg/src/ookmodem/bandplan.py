"""ISM band registry and the 433 MHz channel grid.

Four bands are registered: 433 MHz, 868 MHz, 915 MHz and 2.4 GHz. The
2.4 GHz comparison row as published carries the 24 GHz band's numbers
(24-24.25 GHz, center 24.125 GHz). ``registry(strict=True)`` keeps those
printed values; the default corrected view uses 2.400-2.4835 GHz centered on
2.45 GHz. Either way the entry's ``provenance`` says so.

The 433 MHz band holds 69 channels spaced 25 kHz. Channel 1 at 433.075 MHz
is a convention chosen here; all 69 channels (the last at 434.775 MHz) then
sit inside 433.050-434.790 MHz, leaving 12.5 kHz below the first 25 kHz
channel and 2.5 kHz above the last.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

MHZ = 1_000_000
GHZ = 1_000_000_000


@dataclass(frozen=True)
class IsmBand:
    name: str
    low_hz: float
    high_hz: float
    center_hz: float | None
    itu_regions: frozenset[int]
    notes: str
    max_power_mw: float | str = "varies"
    duty_cycle_limit: float | str = "none"
    provenance: str = ""

    def __post_init__(self):
        if not self.low_hz < self.high_hz:
            raise ValueError(f"{self.name}: low edge must be below high edge")
        if self.center_hz is not None and not self.low_hz < self.center_hz < self.high_hz:
            raise ValueError(f"{self.name}: center outside band")
        if not self.itu_regions <= {1, 2, 3}:
            raise ValueError(f"{self.name}: ITU regions are 1, 2 and 3")

    def contains(self, freq_hz: float) -> bool:
        return self.low_hz <= freq_hz <= self.high_hz


_BAND_433 = IsmBand(
    name="433 MHz",
    low_hz=433_050_000, high_hz=434_790_000, center_hz=433_920_000,
    itu_regions=frozenset({1}),
    notes="pros: longer range; better indoor penetration; low path loss. "
          "cons: overcrowded in some frequencies; relatively low quality and "
          "expensive radio systems. Region 1 (Europe).",
    max_power_mw=10.0,
    duty_cycle_limit=1.0,
    provenance="comparison table row 433 MHz; device attributes table "
               "(10 mW, duty cycle up to 100 %)",
)

_BAND_868 = IsmBand(
    name="868 MHz",
    low_hz=863 * MHZ, high_hz=870 * MHZ, center_hz=868 * MHZ,
    itu_regions=frozenset({1}),
    notes="pros: reasonable range; relatively less congested. cons: complex band "
          "plan. Region 1 (Europe); an ISM band in Europe only.",
    max_power_mw=25.0,
    duty_cycle_limit=0.01,
    provenance="comparison table row 868 MHz, range stored as printed; "
               "power and duty cycle from the European limits in the band overview",
)

_BAND_915 = IsmBand(
    name="915 MHz",
    low_hz=902 * MHZ, high_hz=928 * MHZ, center_hz=915 * MHZ,
    itu_regions=frozenset({2, 3}),
    notes="pros: large range up to 1 km; smaller antennas. cons: limited "
          "applications; needs better ISM regulation; high device power "
          "consumption. Region 3 (AUS/NZ), Region 2 (USA/CAN).",
    max_power_mw=1.0,
    duty_cycle_limit="none",
    provenance="comparison table row 915 MHz; power and duty cycle from the "
               "United States limits in the band overview",
)

_NOTES_24 = ("pros: high data rate; low-cost versatile radios. cons: low range "
             "(repeaters help); higher path loss. Regions 1, 2 and 3.")

_BAND_24_PRINTED = IsmBand(
    name="2.4 GHz",
    low_hz=24 * GHZ, high_hz=24_250_000_000, center_hz=24_125_000_000,
    itu_regions=frozenset({1, 2, 3}),
    notes=_NOTES_24,
    max_power_mw=1000.0,
    duty_cycle_limit="none",
    provenance="strict: comparison table row '2.4 GHz' as printed, whose range "
               "24-24.25 GHz and center 24.125 GHz belong to the 24 GHz ISM band",
)

_BAND_24_CORRECTED = IsmBand(
    name="2.4 GHz",
    low_hz=2_400_000_000, high_hz=2_483_500_000, center_hz=2_450_000_000,
    itu_regions=frozenset({1, 2, 3}),
    notes=_NOTES_24,
    max_power_mw=1000.0,
    duty_cycle_limit="none",
    provenance="corrected: conventional 2.400-2.4835 GHz range; the comparison "
               "table prints 24-24.25 GHz / 24.125 GHz for this row "
               "(use strict=True for the printed values)",
)

# Other ISM allocations, listed by frequency only and spelled as published.
OTHER_ISM_BANDS = (
    "6.78 KHz", "13.56 KHz", "27.120 KHz", "40.62 MHz", "5.8 GHz",
    "24.125 GHz", "61.25 GHz", "122.5 GHz", "245 GHz",
)


def registry(strict: bool = False) -> list[IsmBand]:
    """The four compared ISM bands, lowest frequency first."""
    band24 = _BAND_24_PRINTED if strict else _BAND_24_CORRECTED
    return [_BAND_433, _BAND_868, _BAND_915, band24]


def get_band(name: str, strict: bool = False) -> IsmBand:
    for band in registry(strict):
        if band.name == name:
            return band
    raise KeyError(name)


def lookup(freq_hz: float, strict: bool = False) -> list[IsmBand]:
    """Bands whose closed range ``[low, high]`` contains ``freq_hz``."""
    if not freq_hz > 0:
        raise ValueError(f"frequency must be positive, got {freq_hz}")
    return [b for b in registry(strict) if b.contains(freq_hz)]


@dataclass(frozen=True)
class ChannelGrid:
    base_hz: float
    spacing_hz: float
    count: int
    band: IsmBand | None = None

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("channel count must be positive")
        if self.band is not None:
            last = self.base_hz + (self.count - 1) * self.spacing_hz
            if not (self.band.low_hz <= self.base_hz and last <= self.band.high_hz):
                raise ValueError("channel grid does not fit inside its band")

    def frequencies(self) -> list[float]:
        return [channel_freq(self, c) for c in range(1, self.count + 1)]


DEFAULT_433_GRID = ChannelGrid(433_075_000, 25_000, 69, _BAND_433)


def channel_freq(grid: ChannelGrid, channel: int) -> float:
    """Center frequency of 1-based ``channel``."""
    if int(channel) != channel or not 1 <= channel <= grid.count:
        raise ValueError(f"channel {channel} out of range 1..{grid.count}")
    return grid.base_hz + (int(channel) - 1) * grid.spacing_hz


# -- rendering ------------------------------------------------------------------

CSV_HEADER = ["name", "low_hz", "high_hz", "center_hz", "regions", "max_power", "duty_cycle"]


def _row(band: IsmBand) -> list[str]:
    def num(x):
        return "" if x is None else f"{x:.0f}"

    power = band.max_power_mw if isinstance(band.max_power_mw, str) else f"{band.max_power_mw:g} mW"
    duty = (band.duty_cycle_limit if isinstance(band.duty_cycle_limit, str)
            else f"{band.duty_cycle_limit * 100:g}%")
    return [band.name, num(band.low_hz), num(band.high_hz), num(band.center_hz),
            "/".join(str(r) for r in sorted(band.itu_regions)), power, duty]


def bands_csv(bands) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for b in bands:
        w.writerow(_row(b))
    return out.getvalue()


def bands_table(bands) -> str:
    rows = [CSV_HEADER] + [_row(b) for b in bands]
    widths = [max(len(r[i]) for r in rows) for i in range(len(CSV_HEADER))]
    return "".join("  ".join(c.ljust(wd) for c, wd in zip(r, widths)).rstrip() + "\n"
                   for r in rows)
