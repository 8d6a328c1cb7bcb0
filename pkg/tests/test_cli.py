import csv
import subprocess
import sys

import numpy as np
import pytest

from ookmodem.channel import add_awgn
from ookmodem.cli import EXIT_IO, EXIT_MISMATCH, EXIT_NO_SIGNAL, EXIT_OK, EXIT_USAGE, main
from ookmodem.codebook import ETEKCITY_OFF, ETEKCITY_ON
from ookmodem.iq import IQBuffer, read_iq, write_iq
from ookmodem.modulator import ModulationConfig, SymbolTiming, modulate


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines())


# -- encode ---------------------------------------------------------------------

def test_encode_code_name_roundtrip(tmp_path, capsys):
    out = tmp_path / "tx.cf32"
    code, text, _ = run(capsys, "encode", "--code-name", "ON", "--out", out,
                        "--sample-rate", 1000000, "--report", "kv")
    assert code == EXIT_OK
    fields = kv(text)
    assert fields["bits"] == ETEKCITY_ON
    assert fields["samples"] == str(4 * 29_000)
    assert fields["duration_s"] == "0.116000"
    assert fields["occupied_bandwidth_hz"] == "1000"
    code, text, _ = run(capsys, "decode", "--in", out, "--format", "cf32",
                        "--sample-rate", 1000000, "--report", "kv")
    assert code == EXIT_OK
    assert kv(text)["match"] == "ON"


def test_encode_two_bits(tmp_path, capsys):
    out = tmp_path / "b.cu8"
    code, text, _ = run(capsys, "encode", "--bits", "01", "--out", out, "--format", "cu8",
                        "--sample-rate", 100000, "--repeats", 1)
    assert code == EXIT_OK
    buf = read_iq(out, "cu8", 1e5)
    # (2 symbols * 4 + 16 gap) units of 25 samples
    assert len(buf) == 24 * 25
    assert "occupied bandwidth hz" in text


def test_encode_rolloff_in_bandwidth(tmp_path, capsys):
    code, text, _ = run(capsys, "encode", "--bits", "1", "--out", tmp_path / "x.cf32",
                        "--sample-rate", 1e6, "--rolloff", 0.35, "--unit-us", 100,
                        "--report", "kv")
    assert code == EXIT_OK
    assert kv(text)["occupied_bandwidth_hz"] == "3375"


@pytest.mark.parametrize("argv", [
    ["--bits", "012"],
    ["--bits", ""],
    ["--code-name", "DIM"],
    ["--bits", "01", "--rolloff", "2"],
    ["--bits", "01", "--short-units", "3"],
    ["--bits", "01", "--offset-hz", "600000"],
])
def test_encode_usage_errors(tmp_path, capsys, argv):
    out = tmp_path / "never.cf32"
    code, _, err = run(capsys, "encode", *argv, "--out", out, "--sample-rate", 1e6)
    assert code == EXIT_USAGE
    assert err
    assert not out.exists()


def test_encode_invalid_bits_message(tmp_path, capsys):
    _, _, err = run(capsys, "encode", "--bits", "012", "--out", tmp_path / "x",
                    "--sample-rate", 1e6)
    assert "invalid bitstring" in err


def test_encode_rate_too_low(tmp_path, capsys):
    code, _, err = run(capsys, "encode", "--bits", "01", "--out", tmp_path / "x",
                       "--sample-rate", 1000)
    assert code == EXIT_USAGE and "sample rate too low" in err


def test_encode_unwritable(tmp_path, capsys):
    code, _, _ = run(capsys, "encode", "--bits", "01", "--out", tmp_path / "no" / "x.cf32",
                     "--sample-rate", 1e6)
    assert code == EXIT_IO


def test_encode_missing_required(capsys):
    code, _, _ = run(capsys, "encode", "--bits", "01")
    assert code == EXIT_USAGE


def test_encode_custom_codebook(tmp_path, capsys):
    cb = tmp_path / "cb.txt"
    cb.write_text("DIM 0101\nBRIGHT 1010\n")
    out = tmp_path / "dim.cs16"
    code, text, _ = run(capsys, "encode", "--code-name", "DIM", "--codebook", cb,
                        "--out", out, "--format", "cs16", "--sample-rate", 1e6, "--report", "kv")
    assert code == EXIT_OK and kv(text)["bits"] == "0101"
    code, text, _ = run(capsys, "decode", "--in", out, "--format", "cs16", "--sample-rate", 1e6,
                        "--codebook", cb, "--report", "kv")
    assert kv(text)["match"] == "DIM"


def test_bad_codebook_file(tmp_path, capsys):
    cb = tmp_path / "cb.txt"
    cb.write_text("A 01\nA 10\n")
    code, _, err = run(capsys, "encode", "--code-name", "A", "--codebook", cb,
                       "--out", tmp_path / "x", "--sample-rate", 1e6)
    assert code == EXIT_IO and "line 2" in err


# -- decode ---------------------------------------------------------------------

@pytest.fixture
def off_capture(tmp_path):
    path = tmp_path / "off.cu8"
    write_iq(modulate(ETEKCITY_OFF, ModulationConfig(amplitude=0.8), 1e6), path, "cu8")
    return path


def test_decode_names_off(off_capture, capsys):
    code, text, _ = run(capsys, "decode", "--in", off_capture, "--format", "cu8",
                        "--sample-rate", 1e6)
    assert code == EXIT_OK
    assert "OFF" in text and ETEKCITY_OFF in text


def test_decode_kv_report(off_capture, capsys):
    code, text, _ = run(capsys, "decode", "--in", off_capture, "--format", "cu8",
                        "--sample-rate", 1e6, "--report", "kv")
    fields = kv(text)
    assert fields["bits"] == ETEKCITY_OFF
    assert fields["match"] == "OFF" and fields["distance"] == "0"
    assert fields["frames"] == "4"
    assert float(fields["unit_us"]) == pytest.approx(250, abs=1)
    assert fields["frame0"] == f"{ETEKCITY_OFF}@0"


def test_decode_manual_timing(off_capture, capsys):
    code, text, _ = run(capsys, "decode", "--in", off_capture, "--format", "cu8",
                        "--sample-rate", 1e6, "--timing", "manual", "--unit-us", 250,
                        "--report", "kv")
    assert code == EXIT_OK and kv(text)["match"] == "OFF"


def test_decode_zero_file_is_no_signal(tmp_path, capsys):
    path = tmp_path / "zero.cs16"
    path.write_bytes(b"\x00" * 40_000)
    code, _, err = run(capsys, "decode", "--in", path, "--format", "cs16", "--sample-rate", 1e6)
    assert code == EXIT_NO_SIGNAL
    assert "no signal detected" in err


def test_decode_exports(off_capture, tmp_path, capsys):
    env, runs = tmp_path / "env.csv", tmp_path / "runs.csv"
    code, _, _ = run(capsys, "decode", "--in", off_capture, "--format", "cu8",
                     "--sample-rate", 1e6, "--export-envelope", env, "--export-runs", runs)
    assert code == EXIT_OK
    rows = list(csv.reader(open(env)))
    assert rows[0] == ["sample_index", "value"]
    assert len(rows) - 1 == len(read_iq(off_capture, "cu8", 1e6))
    run_rows = list(csv.reader(open(runs)))
    assert run_rows[0] == ["level", "duration_samples"]
    assert sum(int(r[1]) for r in run_rows[1:]) == len(rows) - 1
    assert {r[0] for r in run_rows[1:]} == {"high", "low"}


def test_decode_io_errors(tmp_path, capsys):
    code, _, _ = run(capsys, "decode", "--in", tmp_path / "missing", "--format", "cu8",
                     "--sample-rate", 1e6)
    assert code == EXIT_IO
    odd = tmp_path / "odd.cs16"
    odd.write_bytes(b"\x00" * 7)
    code, _, err = run(capsys, "decode", "--in", odd, "--format", "cs16", "--sample-rate", 1e6)
    assert code == EXIT_IO and "truncated" in err


@pytest.mark.parametrize("argv", [
    ["--format", "wav", "--sample-rate", "1e6"],
    ["--format", "cu8"],
    ["--format", "cu8", "--sample-rate", "0"],
    ["--format", "cu8", "--sample-rate", "1e6", "--center-freq", "-5"],
    ["--format", "cu8", "--sample-rate", "1e6", "--max-hamming", "-1"],
    ["--format", "cu8", "--sample-rate", "1e6", "--timing", "manual", "--long-units", "9"],
])
def test_decode_usage_errors(off_capture, capsys, argv):
    code, _, _ = run(capsys, "decode", "--in", off_capture, *argv)
    assert code == EXIT_USAGE


# -- simulate ---------------------------------------------------------------------

def test_simulate_on_at_30_db(capsys):
    for seed in (0, 1, 2**64 - 1):
        code, text, _ = run(capsys, "simulate", "--code-name", "ON", "--snr-db", 30,
                            "--seed", seed, "--report", "kv")
        assert code == EXIT_OK
        fields = kv(text)
        assert fields["bit_errors"] == "0" and fields["match"] == "ON"
        assert fields["rx_bits"] == ETEKCITY_ON


def test_simulate_noiseless(capsys):
    code, text, _ = run(capsys, "simulate", "--bits", "1", "--noiseless", "--seed", 0,
                        "--report", "kv")
    assert code == EXIT_OK and kv(text)["status"] == "exact"


def test_simulate_deterministic(capsys):
    argv = ["simulate", "--code-name", "OFF", "--snr-db", 6, "--seed", 77, "--offset-hz",
            25000, "--gain", 0.3, "--rx-timing", "auto", "--unit-us", 20, "--report", "kv"]
    first = run(capsys, *argv)
    assert run(capsys, *argv) == first


def test_simulate_mismatch_and_no_signal(capsys):
    # at -10 dB the bits do not survive
    code, text, _ = run(capsys, "simulate", "--code-name", "ON", "--snr-db", -10,
                        "--seed", 1, "--report", "kv", "--rx-timing", "auto")
    assert code in (EXIT_MISMATCH, EXIT_NO_SIGNAL)
    assert kv(text)["status"] != "exact"


def test_simulate_usage(capsys):
    assert run(capsys, "simulate", "--bits", "01", "--seed", 0)[0] == EXIT_USAGE
    assert run(capsys, "simulate", "--bits", "01", "--noiseless", "--seed", -1)[0] == EXIT_USAGE
    assert run(capsys, "simulate", "--bits", "01", "--noiseless")[0] == EXIT_USAGE
    assert run(capsys, "simulate", "--bits", "01", "--noiseless", "--seed", 0,
               "--gain", 0)[0] == EXIT_USAGE


# -- analyze ------------------------------------------------------------------------

def test_analyze_tone_at_plus_100k(tmp_path, capsys):
    n = 1 << 16
    path = tmp_path / "tone.cf32"
    write_iq(IQBuffer(0.5 * np.exp(2j * np.pi * 0.1 * np.arange(n)), 1e6), path, "cf32")
    code, text, _ = run(capsys, "analyze", "--in", path, "--format", "cf32", "--sample-rate",
                        1e6, "--center-freq", 433.92e6, "--fft", 1024, "--report", "kv")
    assert code == EXIT_OK
    fields = kv(text)
    assert abs(float(fields["peak_freq_hz"]) - 434.02e6) < 1e6 / 1024
    # off-bin tone: parabolic interpolation recovers most of the Hann scalloping loss
    assert float(fields["peak_power_db"]) == pytest.approx(20 * np.log10(0.5), abs=0.5)


def test_analyze_ook_at_37_6_db(tmp_path, capsys):
    # half scale so the noise peaks are not clipped by the int16 format;
    # the 640-sample frame gap holds whole 256-point segments
    cfg = ModulationConfig(amplitude=0.5, carrier_offset_hz=-55_000.0,
                           timing=SymbolTiming(unit_us=40))
    buf = add_awgn(modulate(ETEKCITY_ON, cfg, 1e6), 37.6, 3)
    path = tmp_path / "cap.cs16"
    write_iq(buf, path, "cs16")
    code, text, _ = run(capsys, "analyze", "--in", path, "--format", "cs16", "--sample-rate",
                        1e6, "--center-freq", 433.92e6, "--fft", 256, "--report", "kv")
    assert code == EXIT_OK
    fields = kv(text)
    assert float(fields["snr_db"]) == pytest.approx(37.6, abs=2.0)
    assert fields["distinct_peak"] == "yes"


def test_analyze_exports(tmp_path, capsys):
    path = tmp_path / "n.cf32"
    write_iq(IQBuffer(np.exp(2j * np.pi * 0.2 * np.arange(8192)), 2e6), path, "cf32")
    spec, wf = tmp_path / "s.csv", tmp_path / "w.csv"
    code, _, _ = run(capsys, "analyze", "--in", path, "--format", "cf32", "--sample-rate", 2e6,
                     "--fft", 256, "--avg", 4, "--export-spectrum", spec,
                     "--export-waterfall", wf)
    assert code == EXIT_OK
    assert len(list(csv.reader(open(spec)))) == 257
    rows = list(csv.reader(open(wf)))
    assert len(rows[0]) == 256 and len(rows) == 1 + 8192 // (256 * 4)


@pytest.mark.parametrize("fft", ["1000", "0", "abc", "4"])
def test_analyze_bad_fft(tmp_path, capsys, fft):
    path = tmp_path / "n.cf32"
    write_iq(IQBuffer(np.ones(4096), 1e6), path, "cf32")
    code, _, _ = run(capsys, "analyze", "--in", path, "--format", "cf32", "--sample-rate", 1e6,
                     "--fft", fft)
    assert code == EXIT_USAGE


def test_analyze_short_capture(tmp_path, capsys):
    path = tmp_path / "n.cf32"
    write_iq(IQBuffer(np.ones(100), 1e6), path, "cf32")
    code, _, _ = run(capsys, "analyze", "--in", path, "--format", "cf32", "--sample-rate", 1e6,
                     "--fft", 1024)
    assert code == EXIT_USAGE


# -- bands ------------------------------------------------------------------------------

def test_bands_table(capsys):
    code, text, _ = run(capsys, "bands")
    assert code == EXIT_OK
    lines = text.splitlines()
    assert len(lines) == 5
    assert [ln.split()[0] for ln in lines[1:]] == ["433", "868", "915", "2.4"]


def test_bands_lookup(capsys):
    code, text, _ = run(capsys, "bands", "--freq", 433920000, "--csv")
    assert code == EXIT_OK
    rows = list(csv.reader(text.splitlines()))
    assert len(rows) == 2 and rows[1][0] == "433 MHz"


def test_bands_strict(capsys):
    _, text, _ = run(capsys, "bands", "--csv", "--strict")
    assert "24125000000" in text


@pytest.mark.parametrize("freq", ["-1", "0", "abc"])
def test_bands_bad_freq(capsys, freq):
    assert run(capsys, "bands", "--freq", freq)[0] == EXIT_USAGE


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ookmodem.cli", "bands", "--csv"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("name,low_hz,high_hz")
    proc = subprocess.run([sys.executable, "-m", "ookmodem.cli", "bands", "--freq", "-1"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
