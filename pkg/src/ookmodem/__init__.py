"""Software OOK modem for 433 MHz-class remote-control signals."""

from .channel import ChannelConfig, add_awgn, apply_channel
from .codebook import Codebook, Match, builtin_etekcity, load_codebook, match
from .demod import (AUTO, DecodeReport, Envelope, Frame, RunLengthSequence, binarize,
                    decode, decode_frames, envelope, run_lengths, smooth)
from .errors import CodebookError, DecodeError, IQFormatError, NoSignalError, OokError
from .iq import IQBuffer, IQFormat, read_iq, scale, write_iq
from .modulator import (ModulationConfig, SymbolTiming, apply_carrier_offset, modulate,
                        occupied_bandwidth)

__version__ = "0.1.0"
