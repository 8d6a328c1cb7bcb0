"""``ook`` command line tool.

Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 no signal / no frame
decoded, 4 simulate finished but the decoded bits differ from the sent bits.
"""

from __future__ import annotations

import argparse
import sys

from . import bandplan, spectrum
from .channel import NOISELESS, ChannelConfig, apply_channel
from .codebook import builtin_etekcity, load_codebook, match
from .demod import (AUTO, DecoderSettings, decode, write_envelope_csv,
                    write_runs_csv)
from .errors import CodebookError, IQFormatError, OokError
from .iq import read_iq, write_iq
from .modulator import ModulationConfig, SymbolTiming, modulate, validate_bits

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_NO_SIGNAL = 3
EXIT_MISMATCH = 4

FORMATS = ["cu8", "cs16", "cf32"]


class UsageError(Exception):
    pass


def _positive(kind=float):
    def conv(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def _nonneg(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _count(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid count {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return n


def _pow2(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid fft size {text!r}") from None
    if n < 8 or n & (n - 1):
        raise argparse.ArgumentTypeError(f"fft size must be a power of two >= 8, got {text}")
    return n


def _seed(text):
    try:
        n = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return n


def _add_timing(p, manual_switch=False):
    g = p.add_argument_group("symbol timing")
    if manual_switch:
        g.add_argument("--timing", choices=["auto", "manual"], default="auto",
                       help="estimate timing from the signal, or use the flags below")
    g.add_argument("--unit-us", type=_positive(float), default=250.0)
    g.add_argument("--symbol-units", type=_positive(int), default=4)
    g.add_argument("--short-units", type=_positive(int), default=1)
    g.add_argument("--long-units", type=_positive(int), default=3)
    g.add_argument("--gap-units", type=_positive(int), default=16)
    g.add_argument("--repeats", type=_positive(int), default=4)


def _timing(args) -> SymbolTiming:
    try:
        return SymbolTiming(args.unit_us, args.symbol_units, args.short_units,
                            args.long_units, args.gap_units, args.repeats)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _add_bits(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--bits", help="bitstring of 0/1 characters")
    g.add_argument("--code-name", help="command name looked up in the codebook")
    p.add_argument("--codebook", help="codebook file (default: built-in Etekcity)")


def _codebook(args):
    if getattr(args, "codebook", None):
        return load_codebook(args.codebook)
    return builtin_etekcity()


def _bits(args, codebook) -> str:
    if args.bits is not None:
        try:
            return validate_bits(args.bits)
        except ValueError as e:
            raise UsageError(str(e)) from None
    if args.code_name not in codebook:
        raise UsageError(f"unknown code name {args.code_name!r}")
    return codebook[args.code_name]


def _emit(fields: dict, mode: str, out=None):
    out = out or sys.stdout
    if mode == "kv":
        for k, v in fields.items():
            out.write(f"{k}={'' if v is None else v}\n")
    else:
        width = max(len(k) for k in fields)
        for k, v in fields.items():
            out.write(f"{k.replace('_', ' '):<{width}}  {'-' if v is None else v}\n")


# -- subcommands ----------------------------------------------------------------

def cmd_encode(args) -> int:
    codebook = _codebook(args)
    bits = _bits(args, codebook)
    timing = _timing(args)
    try:
        config = ModulationConfig(args.amplitude, args.offset_hz, args.rolloff, timing)
        buf = modulate(bits, config, args.sample_rate, args.center_freq)
    except ValueError as e:
        raise UsageError(str(e)) from None
    write_iq(buf, args.out, args.format)
    _emit({
        "bits": bits,
        "samples": len(buf),
        "duration_s": f"{buf.duration_seconds:.6f}",
        "bit_rate_hz": f"{config.bit_rate_hz:g}",
        "occupied_bandwidth_hz": f"{config.occupied_bandwidth_hz:g}",
        "out": args.out,
    }, args.report)
    return EXIT_OK


def _decoder_timing(args):
    return AUTO if args.timing == "auto" else _timing(args)


def cmd_decode(args) -> int:
    timing = _decoder_timing(args)
    codebook = _codebook(args)
    buf = read_iq(args.input, args.format, args.sample_rate, args.center_freq)
    report = decode(buf, timing, codebook, DecoderSettings(max_hamming=args.max_hamming))
    if args.export_envelope:
        write_envelope_csv(report.envelope, args.export_envelope)
    if args.export_runs:
        write_runs_csv(report.runs, args.export_runs)
    fields = {
        "bits": report.voted_bits,
        "match": report.match.name if report.match else "unknown",
        "distance": report.match.distance if report.match else None,
        "frames": report.stats.frame_count,
        "agreement": f"{report.agreement:.3f}",
        "unit_us": f"{report.stats.unit_us:.2f}",
        "symbol_period_us": f"{report.stats.symbol_period_us:.2f}",
        "threshold_low": f"{report.stats.threshold_low:.6g}",
        "threshold_high": f"{report.stats.threshold_high:.6g}",
    }
    for i, f in enumerate(report.frames):
        fields[f"frame{i}"] = f"{f.bits}@{f.start_sample}" + ("" if f.regular else "!")
    _emit(fields, args.report)
    return EXIT_OK


def cmd_simulate(args) -> int:
    codebook = _codebook(args)
    bits = _bits(args, codebook)
    timing = _timing(args)
    snr = NOISELESS if args.noiseless else args.snr_db
    try:
        tx = modulate(bits, ModulationConfig(timing=timing), args.sample_rate)
        rx = apply_channel(tx, ChannelConfig(snr, args.seed, args.gain, args.offset_hz))
    except ValueError as e:
        raise UsageError(str(e)) from None
    fields = {"tx_bits": bits, "snr_db": snr, "seed": args.seed}
    try:
        report = decode(rx, AUTO if args.rx_timing == "auto" else timing, codebook)
        rx_bits = report.voted_bits
    except OokError as e:
        fields.update(rx_bits=None, bit_errors=None, match="unknown", status=str(e))
        _emit(fields, args.report)
        return EXIT_NO_SIGNAL
    if len(rx_bits) == len(bits):
        errors = sum(a != b for a, b in zip(bits, rx_bits))
    else:
        errors = max(len(bits), len(rx_bits))
    found = match(rx_bits, codebook)
    fields.update(rx_bits=rx_bits, bit_errors=errors,
                  match=found.name if found else "unknown",
                  frames=report.stats.frame_count,
                  status="exact" if rx_bits == bits else "mismatch")
    _emit(fields, args.report)
    return EXIT_OK if rx_bits == bits else EXIT_MISMATCH


def cmd_analyze(args) -> int:
    buf = read_iq(args.input, args.format, args.sample_rate, args.center_freq)
    if len(buf) < args.fft:
        raise UsageError(f"capture of {len(buf)} samples is shorter than fft size {args.fft}")
    segments = None
    if args.avg is not None:
        segments = min(args.avg, len(buf) // args.fft)
    a = spectrum.analyze(buf, args.fft, segments, args.halfwidth)
    if args.export_spectrum:
        spectrum.write_spectrum_csv(a.spectrum, args.export_spectrum)
    if args.export_waterfall:
        freqs, rows = spectrum.waterfall(buf, args.fft, args.avg or 1)
        spectrum.write_waterfall_csv(freqs, rows, args.export_waterfall)
    _emit({
        "peak_freq_hz": f"{a.peak.freq_hz:.1f}",
        "peak_power_db": f"{a.peak.power_db:.2f}",
        "snr_db": f"{a.snr.snr_db:.2f}",
        "distinct_peak": "yes" if a.snr.distinct_peak else "no",
        "on_fraction": f"{a.on_fraction:.4f}",
        "fft_size": a.spectrum.fft_size,
        "segments": a.spectrum.segments_averaged,
        "bin_width_hz": f"{a.spectrum.bin_width_hz:g}",
    }, args.report)
    return EXIT_OK


def cmd_bands(args) -> int:
    if args.freq is not None:
        if not args.freq > 0:
            raise UsageError(f"frequency must be positive, got {args.freq:g}")
        bands = bandplan.lookup(args.freq, args.strict)
    else:
        bands = bandplan.registry(args.strict)
    text = bandplan.bands_csv(bands) if args.csv else bandplan.bands_table(bands)
    sys.stdout.write(text)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ook", description="Software OOK modem.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="modulate bits into a raw I/Q file")
    _add_bits(p)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=FORMATS, default="cf32")
    p.add_argument("--sample-rate", type=_positive(float), required=True)
    p.add_argument("--center-freq", type=_nonneg, default=0.0)
    p.add_argument("--amplitude", type=_positive(float), default=1.0)
    p.add_argument("--offset-hz", type=float, default=0.0)
    p.add_argument("--rolloff", type=float, default=0.0)
    p.add_argument("--report", choices=["text", "kv"], default="text")
    _add_timing(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="demodulate and decode a raw I/Q file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=FORMATS, required=True)
    p.add_argument("--sample-rate", type=_positive(float), required=True)
    p.add_argument("--center-freq", type=_nonneg, default=0.0)
    p.add_argument("--codebook")
    p.add_argument("--max-hamming", type=_count, default=0)
    p.add_argument("--report", choices=["text", "kv"], default="text")
    p.add_argument("--export-envelope")
    p.add_argument("--export-runs")
    _add_timing(p, manual_switch=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="encode, pass through a noisy channel, decode")
    _add_bits(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--snr-db", type=float)
    g.add_argument("--noiseless", action="store_true")
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--offset-hz", type=float, default=0.0)
    p.add_argument("--gain", type=_positive(float), default=1.0)
    p.add_argument("--sample-rate", type=_positive(float), default=1e6)
    p.add_argument("--rx-timing", choices=["auto", "known"], default="known",
                   help="decode with estimated timing or with the transmit timing")
    p.add_argument("--report", choices=["text", "kv"], default="text")
    _add_timing(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="spectrum, peak frequency and SNR of a capture")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=FORMATS, required=True)
    p.add_argument("--sample-rate", type=_positive(float), required=True)
    p.add_argument("--center-freq", type=_nonneg, default=0.0)
    p.add_argument("--fft", type=_pow2, required=True)
    p.add_argument("--avg", type=_positive(int))
    p.add_argument("--halfwidth", type=_positive(int), default=3)
    p.add_argument("--export-spectrum")
    p.add_argument("--export-waterfall")
    p.add_argument("--report", choices=["text", "kv"], default="text")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bands", help="ISM band registry")
    p.add_argument("--freq", type=float)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--strict", action="store_true",
                   help="2.4 GHz row exactly as printed in the comparison table")
    p.set_defaults(func=cmd_bands)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"ook {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (IQFormatError, CodebookError) as e:
        print(f"ook {args.command}: {e}", file=sys.stderr)
        return EXIT_IO
    except OokError as e:
        print(f"ook {args.command}: {e}", file=sys.stderr)
        return EXIT_NO_SIGNAL
    except OSError as e:
        print(f"ook {args.command}: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"ook {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
