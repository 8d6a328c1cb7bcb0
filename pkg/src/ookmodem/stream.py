"""Chunked decoding for captures that arrive piece by piece.

All state lives in a :class:`StreamState` value that each call consumes and
returns, so a stream has exactly one owner and nothing is shared::

    state = StreamState.start(fs, timing)
    for chunk in chunks:
        state, frames = decode_chunk(state, chunk)
    state, frames = finish(state)

Differences from the batch chain: timing must be known, the moving averages
are causal (trailing) instead of centered, and the slicing levels are held
constant over each chunk, taken from the min/max over the trailing window
that ends with that chunk. Where that window is quiet (range under a quarter
of the largest range seen so far) the running global min/max apply instead.
Nothing is sliced until one symbol period plus one frame gap of samples has
arrived, so the first levels always span both carrier states. A frame is
emitted once the gap after it has been seen, so output lags input by about
one frame gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .demod import (DecoderSettings, Frame, Run, RunLengthSequence, _hysteresis,
                    decode_frames, frame_timing, merge_glitches)
from .errors import DecodeError
from .modulator import SymbolTiming


def _trailing_mean(x: np.ndarray, tail: np.ndarray, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Causal moving average of ``x`` given the previous ``w - 1`` samples."""
    full = np.concatenate((tail, x))
    csum = np.concatenate(([0.0], np.cumsum(full)))
    idx = np.arange(len(tail), len(full)) + 1
    lo = np.maximum(idx - w, 0)
    out = (csum[idx] - csum[lo]) / (idx - lo)
    return out, full[max(len(full) - (w - 1), 0):] if w > 1 else full[:0]


@dataclass(frozen=True)
class StreamState:
    sample_rate_hz: float
    timing: SymbolTiming
    settings: DecoderSettings
    level: bool = False
    pending: tuple[bool, int] | None = None
    frame_runs: tuple[Run, ...] = ()
    frame_start: int = 0
    position: int = 0
    smooth_tail: np.ndarray = field(default_factory=lambda: np.zeros(0))
    range_tail: np.ndarray = field(default_factory=lambda: np.zeros(0))
    history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    backlog: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128))
    global_min: float = np.inf
    global_max: float = -np.inf

    @classmethod
    def start(cls, sample_rate_hz: float, timing: SymbolTiming,
              settings: DecoderSettings | None = None) -> StreamState:
        return cls(sample_rate_hz, timing, settings or DecoderSettings())

    @property
    def unit(self) -> float:
        return self.timing.samples_per_unit(self.sample_rate_hz)

    @property
    def split(self) -> float:
        return frame_timing(RunLengthSequence(), self.sample_rate_hz, self.timing) \
            .split_threshold_samples


def _emit(state: StreamState, runs: list[Run]) -> list[Frame]:
    """Decode one gap-delimited group of runs; ``runs`` starts with a high."""
    if not any(r.level for r in runs):
        return []
    seq = merge_glitches(RunLengthSequence(runs), max(state.settings.glitch_samples,
                                                      int(state.unit // 4)))
    try:
        frames = decode_frames(seq, state.sample_rate_hz, state.timing)
    except DecodeError:
        return []
    return [replace(f, start_sample=f.start_sample + state.frame_start) for f in frames]


def _push_runs(state: StreamState, completed: list[Run]):
    """Feed completed runs to the frame assembler."""
    runs = list(state.frame_runs)
    start = state.frame_start
    frames: list[Frame] = []
    for run in completed:
        if not run.level and run.duration > state.split:
            if runs:
                frames += _emit(replace(state, frame_start=start), runs + [run])
                start += sum(r.duration for r in runs)
                runs = []
            start += run.duration
        elif not runs and not run.level:
            start += run.duration
        else:
            runs.append(run)
    return runs, start, frames


def decode_chunk(state: StreamState, samples) -> tuple[StreamState, list[Frame]]:
    """Consume one chunk of complex samples; return the new state and any finished frames."""
    x = np.asarray(samples, dtype=np.complex128).reshape(-1)
    if len(state.backlog):
        x = np.concatenate((state.backlog, x))
    if len(x) == 0:
        return state, []
    t = state.timing
    warmup = (t.symbol_period_units + t.inter_frame_gap_units) * state.unit
    if state.position == 0 and len(x) < warmup:
        return replace(state, backlog=x), []
    return _slice_chunk(replace(state, backlog=x[:0]), x)


def _slice_chunk(state: StreamState, x: np.ndarray) -> tuple[StreamState, list[Frame]]:
    s = state.settings
    env = np.abs(x)
    w = max(1, int(round(state.unit / 8)))
    wr = max(1, int(round(state.unit / 2)))
    sm, smooth_tail = _trailing_mean(env, state.smooth_tail, w)
    rng, range_tail = _trailing_mean(env, state.range_tail, wr)
    window = int(round(s.window_periods * state.timing.symbol_period_units * state.unit))
    history = np.concatenate((state.history, rng))[-window:]
    vmin, vmax = float(history.min()), float(history.max())
    gmin, gmax = min(state.global_min, vmin), max(state.global_max, vmax)
    if vmax - vmin < 0.25 * (gmax - gmin):
        vmin, vmax = gmin, gmax
    if vmax - vmin < s.flat_floor:
        levels = np.zeros(len(x), dtype=bool)
    else:
        span = vmax - vmin
        lo = np.full(len(x), vmin + s.low_frac * span)
        hi = np.full(len(x), vmin + s.high_frac * span)
        levels = _hysteresis(sm, lo, hi, initial=state.level)

    edges = np.flatnonzero(levels[1:] != levels[:-1]) + 1
    starts = np.concatenate(([0], edges))
    durs = np.diff(np.concatenate((starts, [len(levels)])))
    pieces = [(bool(levels[a]), int(d)) for a, d in zip(starts, durs)]
    if state.pending is not None and state.pending[0] == pieces[0][0]:
        pieces[0] = (pieces[0][0], pieces[0][1] + state.pending[1])
    elif state.pending is not None:
        pieces.insert(0, state.pending)
    completed = [Run(lv, d) for lv, d in pieces[:-1]]
    runs, start, frames = _push_runs(state, completed)
    new = replace(state, level=bool(levels[-1]), pending=pieces[-1], frame_runs=tuple(runs),
                  frame_start=start, position=state.position + len(x),
                  smooth_tail=smooth_tail, range_tail=range_tail, history=history,
                  global_min=gmin, global_max=gmax)
    return new, frames


def finish(state: StreamState) -> tuple[StreamState, list[Frame]]:
    """Flush the run in progress and any partial frame at end of stream."""
    early: list[Frame] = []
    if len(state.backlog):
        # stream shorter than the warm-up: slice what there is
        state, early = _slice_chunk(state, state.backlog)
    completed = [Run(*state.pending)] if state.pending is not None else []
    runs, start, frames = _push_runs(state, completed)
    if runs:
        frames += _emit(replace(state, frame_start=start), runs)
    return replace(state, pending=None, frame_runs=(), frame_start=start), early + frames


def decode_stream(chunks, sample_rate_hz: float, timing: SymbolTiming,
                  settings: DecoderSettings | None = None) -> list[Frame]:
    """Decode an iterable of sample chunks; returns every frame found."""
    state = StreamState.start(sample_rate_hz, timing, settings)
    frames: list[Frame] = []
    for chunk in chunks:
        state, out = decode_chunk(state, chunk)
        frames += out
    state, out = finish(state)
    return frames + out
