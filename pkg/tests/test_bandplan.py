import csv
import io

import pytest

from ookmodem.bandplan import (CSV_HEADER, DEFAULT_433_GRID, OTHER_ISM_BANDS, ChannelGrid,
                               bands_csv, bands_table, channel_freq, get_band, lookup, registry)

MHZ = 1e6


def test_registry_has_four_bands():
    assert [b.name for b in registry()] == ["433 MHz", "868 MHz", "915 MHz", "2.4 GHz"]
    assert [b.name for b in registry(strict=True)] == ["433 MHz", "868 MHz", "915 MHz",
                                                       "2.4 GHz"]


def test_433_row():
    # comparison table: 433.050 - 434.790 MHz, center 433.92 MHz, region 1
    b = get_band("433 MHz", strict=True)
    assert (b.low_hz, b.high_hz, b.center_hz) == (433_050_000, 434_790_000, 433_920_000)
    assert b.itu_regions == {1}
    # device attributes table: 10 mW, duty cycle up to 100 %
    assert b.max_power_mw == 10.0
    assert b.duty_cycle_limit == 1.0


def test_868_row_as_printed():
    b = get_band("868 MHz", strict=True)
    assert (b.low_hz, b.high_hz) == (863 * MHZ, 870 * MHZ)
    assert b.itu_regions == {1}


def test_915_row():
    b = get_band("915 MHz", strict=True)
    assert (b.low_hz, b.high_hz, b.center_hz) == (902 * MHZ, 928 * MHZ, 915 * MHZ)
    assert b.itu_regions == {2, 3}


def test_24_row_strict_is_verbatim():
    b = get_band("2.4 GHz", strict=True)
    assert (b.low_hz, b.high_hz, b.center_hz) == (24e9, 24.25e9, 24.125e9)
    assert b.itu_regions == {1, 2, 3}
    assert "24 GHz" in b.provenance


def test_24_row_corrected_is_flagged():
    b = get_band("2.4 GHz")
    assert (b.low_hz, b.high_hz) == (2.4e9, 2.4835e9)
    assert "24-24.25 GHz" in b.provenance and "strict" in b.provenance


def test_unknown_band():
    with pytest.raises(KeyError):
        get_band("5.8 GHz")
    assert "5.8 GHz" in OTHER_ISM_BANDS


@pytest.mark.parametrize("strict", [False, True])
def test_bands_are_well_formed(strict):
    for b in registry(strict):
        assert b.low_hz < b.center_hz < b.high_hz
        assert b in lookup(b.center_hz, strict)


def test_lookup_examples():
    assert [b.name for b in lookup(433.92e6)] == ["433 MHz"]
    assert lookup(500e6) == []
    assert [b.name for b in lookup(433.050e6)] == ["433 MHz"]
    assert [b.name for b in lookup(434.790e6)] == ["433 MHz"]
    assert lookup(433.0499e6) == []
    assert [b.name for b in lookup(2.45e9)] == ["2.4 GHz"]
    assert lookup(2.45e9, strict=True) == []
    for bad in (0, -1):
        with pytest.raises(ValueError):
            lookup(bad)


def test_default_grid():
    g = DEFAULT_433_GRID
    assert (g.spacing_hz, g.count) == (25_000, 69)
    assert channel_freq(g, 1) == 433_075_000
    assert channel_freq(g, 69) == 434_775_000
    freqs = g.frequencies()
    assert len(freqs) == 69
    band = get_band("433 MHz")
    assert all(band.low_hz < f < band.high_hz for f in freqs)
    # 25 kHz channels: 12.5 kHz spare below channel 1, 2.5 kHz above channel 69
    assert freqs[0] - 12_500 - band.low_hz == 12_500
    assert band.high_hz - (freqs[-1] + 12_500) == 2_500


@pytest.mark.parametrize("ch", [0, 70, -1, 1.5])
def test_channel_out_of_range(ch):
    with pytest.raises(ValueError):
        channel_freq(DEFAULT_433_GRID, ch)


def test_grid_must_fit_band():
    band = get_band("433 MHz")
    with pytest.raises(ValueError):
        ChannelGrid(433_075_000, 25_000, 70, band)
    with pytest.raises(ValueError):
        ChannelGrid(433_000_000, 25_000, 2, band)
    with pytest.raises(ValueError):
        ChannelGrid(433_075_000, 25_000, 0)
    ChannelGrid(433_050_000, 25_000, 70, band)


def test_csv_output():
    rows = list(csv.reader(io.StringIO(bands_csv(registry(strict=True)))))
    assert rows[0] == CSV_HEADER == ["name", "low_hz", "high_hz", "center_hz", "regions",
                                     "max_power", "duty_cycle"]
    assert rows[1] == ["433 MHz", "433050000", "434790000", "433920000", "1", "10 mW", "100%"]
    assert rows[4][:5] == ["2.4 GHz", "24000000000", "24250000000", "24125000000", "1/2/3"]
    assert len(rows) == 5


def test_table_output():
    lines = bands_table(registry()).splitlines()
    assert len(lines) == 5
    assert lines[0].split() == CSV_HEADER
    assert lines[1].startswith("433 MHz")
