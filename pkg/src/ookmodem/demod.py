"""OOK receive chain.

Stages, each usable on its own::

    envelope -> smooth -> binarize -> run_lengths -> decode_frames

:func:`decode` wires them together, estimates timing when it is not given,
votes across repeated frames and optionally looks the result up in a
codebook.

Thresholds are always relative to the observed envelope range, so the chain
is insensitive to overall gain, and the envelope discards phase, so a carrier
offset has no effect on the decoded bits.
"""

from __future__ import annotations

import csv
import heapq
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .codebook import Codebook, Match, match as codebook_match
from .errors import DecodeError, NoSignalError
from .iq import IQBuffer
from .modulator import MIN_SAMPLES_PER_UNIT, SymbolTiming

AUTO = "auto"

HIGH = True
LOW = False


@dataclass(frozen=True, eq=False)
class Envelope:
    values: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if np.any(v < 0):
            raise ValueError("envelope values must be non-negative")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Run:
    level: bool
    duration: int


class RunLengthSequence(tuple):
    """Alternating ``Run`` entries; adjacent levels always differ."""

    def __new__(cls, runs=()):
        runs = tuple(r if isinstance(r, Run) else Run(bool(r[0]), int(r[1])) for r in runs)
        for a, b in zip(runs, runs[1:]):
            if a.level == b.level:
                raise ValueError("run levels must alternate")
        if any(r.duration < 1 for r in runs):
            raise ValueError("run durations must be >= 1")
        return super().__new__(cls, runs)

    @property
    def total(self) -> int:
        return sum(r.duration for r in self)

    def as_pairs(self) -> list[tuple[str, int]]:
        return [("high" if r.level else "low", r.duration) for r in self]


@dataclass(frozen=True)
class Frame:
    bits: str
    start_sample: int
    symbol_period_estimate_us: float
    duty: tuple[float, ...]
    regular: bool = True

    def __post_init__(self):
        if len(self.duty) != len(self.bits):
            raise ValueError("one duty ratio per bit")


@dataclass(frozen=True)
class FrameTiming:
    """Sample-domain timing used to split and classify runs."""

    unit_samples: float
    symbol_period_samples: float
    split_threshold_samples: float


@dataclass
class DecodeStats:
    threshold_low: float
    threshold_high: float
    unit_us: float
    symbol_period_us: float
    frame_count: int
    smoothing_window: int


@dataclass
class DecodeReport:
    frames: list[Frame]
    voted_bits: str | None
    match: Match | None
    stats: DecodeStats
    agreement: float | None = None
    runs: RunLengthSequence | None = field(default=None, repr=False)
    envelope: Envelope | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.voted_bits is None) != (len(self.frames) == 0):
            raise ValueError("voted_bits must be present iff frames were decoded")


# -- stages -------------------------------------------------------------------

def envelope(buffer: IQBuffer) -> Envelope:
    """Per-sample magnitude ``sqrt(i**2 + q**2)``."""
    if len(buffer) == 0:
        raise ValueError("empty buffer")
    return Envelope(np.abs(buffer.samples), buffer.sample_rate_hz)


def smooth(env: Envelope, window_samples: int) -> Envelope:
    """Centered moving average; edge samples average over the part that overlaps."""
    w = int(window_samples)
    n = len(env)
    if w < 1:
        raise ValueError("window must be >= 1")
    if w > n:
        raise ValueError(f"window {w} exceeds envelope length {n}")
    if w == 1:
        return env
    idx = np.arange(n)
    lo = np.maximum(idx - (w - 1) // 2, 0)
    hi = np.minimum(idx + w // 2 + 1, n)
    csum = np.concatenate(([0.0], np.cumsum(env.values)))
    return Envelope((csum[hi] - csum[lo]) / (hi - lo), env.sample_rate_hz)


@dataclass(frozen=True)
class Thresholds:
    low: np.ndarray
    high: np.ndarray


def hysteresis_thresholds(env: Envelope, window_samples: int | None = None,
                          low_frac: float = 0.4, high_frac: float = 0.6,
                          flat_floor: float = 1e-6, range_smoothing: int = 1) -> Thresholds:
    """Per-sample switching levels from the local min/max.

    The min/max are read from ``env`` smoothed over ``range_smoothing``
    samples, which keeps single noise spikes from stretching the range. Where
    a window holds so little contrast that it is presumably silence (range
    under a quarter of the global range), the global levels apply.
    """
    if len(env) == 0:
        raise ValueError("empty envelope")
    v = smooth(env, min(max(int(range_smoothing), 1), len(env))).values
    gmin, gmax = float(v.min()), float(v.max())
    if gmax - gmin < flat_floor:
        raise NoSignalError()
    if window_samples is None or window_samples >= len(v):
        vmin = np.full(len(v), gmin)
        vmax = np.full(len(v), gmax)
    else:
        w = max(int(window_samples), 1)
        vmin = minimum_filter1d(v, w, mode="nearest")
        vmax = maximum_filter1d(v, w, mode="nearest")
        quiet = (vmax - vmin) < 0.25 * (gmax - gmin)
        vmin[quiet] = gmin
        vmax[quiet] = gmax
    span = vmax - vmin
    return Thresholds(vmin + low_frac * span, vmin + high_frac * span)


def binarize(env: Envelope, window_samples: int | None = None, low_frac: float = 0.4,
             high_frac: float = 0.6, flat_floor: float = 1e-6,
             range_smoothing: int = 1) -> np.ndarray:
    """Dual-threshold hysteresis slicer.

    The state goes high only above the upper level and low only below the
    lower one; it starts low. ``window_samples`` sets the sliding min/max
    window (``None`` uses the whole envelope).
    """
    th = hysteresis_thresholds(env, window_samples, low_frac, high_frac, flat_floor,
                               range_smoothing)
    return _hysteresis(env.values, th.low, th.high)


def _hysteresis(v, low, high, initial=False) -> np.ndarray:
    decided = np.full(len(v), -1, dtype=np.int8)
    decided[v > high] = 1
    decided[v < low] = 0
    pos = np.where(decided >= 0, np.arange(len(v)), -1)
    last = np.maximum.accumulate(pos)
    out = np.where(last >= 0, decided[np.maximum(last, 0)], int(initial))
    return out.astype(bool)


def run_lengths(levels) -> RunLengthSequence:
    """Maximal constant runs of a boolean sequence."""
    x = np.asarray(levels, dtype=bool)
    if len(x) == 0:
        raise ValueError("empty level sequence")
    edges = np.flatnonzero(x[1:] != x[:-1]) + 1
    starts = np.concatenate(([0], edges))
    durations = np.diff(np.concatenate((starts, [len(x)])))
    return RunLengthSequence(Run(bool(x[s]), int(d)) for s, d in zip(starts, durations))


def merge_glitches(runs: RunLengthSequence, min_samples: int) -> RunLengthSequence:
    """Absorb runs shorter than ``min_samples`` into their neighbours.

    Shortest runs go first so that a dip inside a pulse is folded back into the
    pulse before the pulse itself is judged. The first and last runs are kept
    as they are (they may be truncated by the buffer edges).
    """
    n = len(runs)
    if n < 3:
        return RunLengthSequence(runs)
    levels = [r.level for r in runs]
    durs = [r.duration for r in runs]
    prev = list(range(-1, n - 1))
    nxt = list(range(1, n + 1))
    nxt[-1] = -1
    alive = [True] * n
    heap = [(durs[i], i) for i in range(1, n - 1) if durs[i] < min_samples]
    heapq.heapify(heap)
    while heap:
        d, i = heapq.heappop(heap)
        if not alive[i] or d != durs[i] or prev[i] < 0 or nxt[i] < 0:
            continue
        p, q = prev[i], nxt[i]
        durs[p] += d + durs[q]
        alive[i] = alive[q] = False
        nxt[p] = nxt[q]
        if nxt[q] >= 0:
            prev[nxt[q]] = p
        if prev[p] >= 0 and nxt[p] >= 0 and durs[p] < min_samples:
            heapq.heappush(heap, (durs[p], p))
    return RunLengthSequence((levels[i], durs[i]) for i in range(n) if alive[i])


def estimate_unit(runs: RunLengthSequence, min_run: int = 3) -> float:
    """Base time unit: the shortest high run of at least ``min_run`` samples."""
    highs = [r.duration for r in runs if r.level and r.duration >= min_run]
    if not highs:
        raise NoSignalError("no signal detected: no pulse of usable length")
    return float(min(highs))


def estimate_symbol_period(runs: RunLengthSequence, unit: float) -> float:
    """Symbol period from (high, low) pairs whose low part is not a gap.

    Lows longer than 8 units count as gaps. Every in-frame pair spans one
    period, while a pair that swallowed a gap is always longer, so a low
    percentile (10th) of the pair durations is used. With no in-frame pair at
    all, four units are assumed.
    """
    r = list(runs)
    sums = [a.duration + b.duration for a, b in zip(r, r[1:])
            if a.level and not b.level and b.duration <= 8 * unit]
    if not sums:
        return 4.0 * unit
    return float(np.percentile(sums, 10, method="lower"))


def resolution(runs: RunLengthSequence, min_run: int = 3) -> float:
    """Typical shortest run (10th percentile of interior runs of either level).

    Only used to size smoothing and glitch windows; it tolerates the odd
    pulse fragment that would drag a plain minimum down.
    """
    inner = [r.duration for r in list(runs)[1:-1] if r.duration >= min_run]
    if not inner:
        raise NoSignalError("no signal detected: no pulse of usable length")
    return float(np.percentile(inner, 10, method="lower"))


def frame_timing(runs: RunLengthSequence, sample_rate_hz: float, timing=AUTO) -> FrameTiming:
    if timing == AUTO or timing is None:
        unit = estimate_unit(runs)
        period = estimate_symbol_period(runs, unit)
        return FrameTiming(unit, period, 2.0 * period)
    unit = timing.samples_per_unit(sample_rate_hz)
    period = timing.symbol_period_units * unit
    # midway between the longest in-frame low and the shortest gap
    split = 0.5 * (timing.symbol_period_units + timing.inter_frame_gap_units) * unit
    return FrameTiming(unit, period, split)


def classify_duty(duty: float) -> str:
    """Short pulse (duty < 0.5) is a 0; ties go to 1."""
    return "1" if duty >= 0.5 else "0"


def decode_frames(runs, sample_rate_hz: float, timing=AUTO) -> list[Frame]:
    """Split runs into frames at long lows and classify each symbol by duty.

    A symbol is a high run plus the low run after it. When that low is a frame
    gap (or missing at the end of the buffer), the symbol period estimate is
    used as the denominator instead. A frame is marked irregular when any of
    its symbols spans less than half or more than 1.5 symbol periods.
    """
    runs = RunLengthSequence(runs)
    if not runs:
        raise ValueError("empty run sequence")
    ft = frame_timing(runs, sample_rate_hz, timing)
    period = ft.symbol_period_samples
    frames: list[Frame] = []
    bits: list[str] = []
    duties: list[float] = []
    start = None
    pos = 0

    regular = True

    def close():
        nonlocal bits, duties, start, regular
        if bits:
            frames.append(Frame("".join(bits), start, period / sample_rate_hz * 1e6,
                                tuple(duties), regular))
        bits, duties, start, regular = [], [], None, True

    items = list(runs)
    for k, run in enumerate(items):
        if run.level:
            nxt = items[k + 1] if k + 1 < len(items) else None
            if nxt is not None and nxt.duration <= ft.split_threshold_samples:
                span = run.duration + nxt.duration
                duty = run.duration / span
                if not 0.5 * period <= span <= 1.5 * period:
                    regular = False
            else:
                duty = run.duration / max(period, run.duration)
            if start is None:
                start = pos
            bits.append(classify_duty(duty))
            duties.append(duty)
        elif run.duration > ft.split_threshold_samples:
            close()
        pos += run.duration
    close()
    if not frames:
        raise DecodeError("no frames decoded")
    return frames


def vote(frames: list[Frame]) -> tuple[str, float]:
    """Positionwise majority over frames of the modal length.

    Irregular frames only take part when no regular frame exists. Returns the
    voted bits and the mean per-position agreement. Length ties prefer the
    longer frame; a bit tie falls back to the mean duty.
    """
    if not frames:
        raise DecodeError("no frames decoded")
    pool = [f for f in frames if f.regular] or list(frames)
    counts = Counter(len(f.bits) for f in pool)
    modal = max(counts, key=lambda n: (counts[n], n))
    group = [f for f in pool if len(f.bits) == modal]
    ones = np.array([[b == "1" for b in f.bits] for f in group], dtype=float)
    duty = np.array([f.duty for f in group])
    frac = ones.mean(axis=0)
    bits = np.where(frac > 0.5, "1", np.where(frac < 0.5, "0",
                    np.where(duty.mean(axis=0) >= 0.5, "1", "0")))
    agreement = float(np.mean(np.maximum(frac, 1 - frac)))
    return "".join(bits), agreement


# -- full chain ---------------------------------------------------------------

@dataclass(frozen=True)
class DecoderSettings:
    """Knobs of the receive chain; defaults match the modulator defaults."""

    low_frac: float = 0.4
    high_frac: float = 0.6
    flat_floor: float = 1e-6
    window_periods: int = 64
    glitch_samples: int = 3
    min_unit_samples: float = 0.8 * MIN_SAMPLES_PER_UNIT
    max_hamming: int = 0


def _slice(env: Envelope, unit: float, period: float, s: DecoderSettings):
    w = min(max(1, int(round(unit / 8))), len(env))
    env_s = smooth(env, w)
    window = int(round(s.window_periods * period))
    th = hysteresis_thresholds(env_s, window, s.low_frac, s.high_frac, s.flat_floor,
                               range_smoothing=max(1, int(round(unit / 2))))
    runs = run_lengths(_hysteresis(env_s.values, th.low, th.high))
    runs = merge_glitches(runs, max(s.glitch_samples, int(unit // 4)))
    return env_s, th, runs, w


@dataclass(frozen=True, eq=False)
class Slicing:
    """Intermediate products of the receive chain up to run lengths."""

    envelope: Envelope
    smoothed: Envelope
    thresholds: Thresholds
    runs: RunLengthSequence
    smoothing_window: int


def slice_buffer(buffer: IQBuffer, timing=AUTO,
                 settings: DecoderSettings | None = None) -> Slicing:
    """Envelope, smoothing, hysteresis and run extraction for ``buffer``.

    With ``timing="auto"`` a coarse pass first slices the envelope smoothed
    over half the minimum supported unit to size the receive filters. The
    final slice uses a moving average over 1/8 unit, min/max levels read over
    half a unit, and absorbs glitches shorter than a quarter unit.
    """
    s = settings or DecoderSettings()
    fs = buffer.sample_rate_hz
    env = envelope(buffer)
    if timing == AUTO or timing is None:
        pre = smooth(env, min(len(env), max(1, int(s.min_unit_samples // 2))))
        coarse = run_lengths(binarize(pre, None, s.low_frac, s.high_frac, s.flat_floor))
        coarse = merge_glitches(coarse, s.glitch_samples)
        unit0 = resolution(coarse, s.glitch_samples)
        if unit0 < s.min_unit_samples:
            raise NoSignalError()
        period0 = estimate_symbol_period(coarse, estimate_unit(coarse, s.glitch_samples))
    else:
        unit0 = timing.samples_per_unit(fs)
        period0 = timing.symbol_period_units * unit0
    env_s, th, runs, w = _slice(env, unit0, period0, s)
    return Slicing(env, env_s, th, runs, w)


def keyed_levels(buffer: IQBuffer, timing=AUTO,
                 settings: DecoderSettings | None = None) -> np.ndarray:
    """Per-sample carrier-on decisions of the receive chain."""
    runs = slice_buffer(buffer, timing, settings).runs
    return np.repeat([r.level for r in runs], [r.duration for r in runs])


def decode(buffer: IQBuffer, timing=AUTO, codebook: Codebook | None = None,
           settings: DecoderSettings | None = None) -> DecodeReport:
    """Run the whole receive chain on ``buffer``.

    See :func:`slice_buffer` for the front end. Frames are then assembled by
    :func:`decode_frames`, voted with :func:`vote` and matched against
    ``codebook`` if one is given.

    Raises :class:`NoSignalError` when there is no usable contrast or no pulse
    of plausible length, and :class:`DecodeError` when no frame assembles.
    """
    s = settings or DecoderSettings()
    fs = buffer.sample_rate_hz
    sl = slice_buffer(buffer, timing, s)
    ft = frame_timing(sl.runs, fs, timing)
    frames = decode_frames(sl.runs, fs, timing)
    voted, agreement = vote(frames)
    found = codebook_match(voted, codebook, s.max_hamming) if codebook is not None else None
    stats = DecodeStats(
        threshold_low=float(np.median(sl.thresholds.low)),
        threshold_high=float(np.median(sl.thresholds.high)),
        unit_us=ft.unit_samples / fs * 1e6,
        symbol_period_us=ft.symbol_period_samples / fs * 1e6,
        frame_count=len(frames),
        smoothing_window=sl.smoothing_window,
    )
    return DecodeReport(frames, voted, found, stats, agreement, sl.runs, sl.envelope)


# -- CSV export -----------------------------------------------------------------

def write_envelope_csv(env: Envelope, path) -> None:
    """``sample_index,value`` rows, one per sample."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_index", "value"])
        for i, v in enumerate(env.values):
            w.writerow([i, repr(float(v))])


def write_runs_csv(runs: RunLengthSequence, path) -> None:
    """``level,duration_samples`` rows, one per run."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "duration_samples"])
        for level, d in runs.as_pairs():
            w.writerow([level, d])
