"""Named command codebooks and Hamming-distance lookup.

File format (UTF-8 text)::

    # comment
    ON   0000010001010101001100110
    OFF  0000010001010101001111000

One ``NAME BITSTRING`` entry per line, separated by whitespace. ``#`` starts
a comment; blank lines are ignored. Names and bitstrings must be unique and
all bitstrings the same length.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

from .errors import CodebookError

ETEKCITY_ON = "0000010001010101001100110"
ETEKCITY_OFF = "0000010001010101001111000"


@dataclass(frozen=True)
class Match:
    name: str
    distance: int


UNKNOWN = None


class Codebook:
    """Immutable mapping of command name to bitstring."""

    def __init__(self, entries=None):
        entries = dict(entries or {})
        lengths = set()
        seen = {}
        for name, bits in entries.items():
            if not name or any(c.isspace() for c in name):
                raise CodebookError(f"invalid command name {name!r}")
            if not bits or set(bits) - {"0", "1"}:
                raise CodebookError(f"{name}: invalid bitstring {bits!r}")
            if bits in seen:
                raise CodebookError(f"{name}: bitstring already used by {seen[bits]}")
            seen[bits] = name
            lengths.add(len(bits))
        if len(lengths) > 1:
            raise CodebookError(f"mixed bitstring lengths {sorted(lengths)}")
        self._entries = MappingProxyType(entries)

    @property
    def entries(self):
        return self._entries

    @property
    def bit_length(self) -> int | None:
        return len(next(iter(self._entries.values()))) if self._entries else None

    def __len__(self):
        return len(self._entries)

    def __contains__(self, name):
        return name in self._entries

    def __getitem__(self, name):
        return self._entries[name]

    def __iter__(self):
        return iter(self._entries)

    def __eq__(self, other):
        return isinstance(other, Codebook) and dict(self._entries) == dict(other._entries)

    def __repr__(self):
        return f"Codebook({dict(self._entries)!r})"


def builtin_etekcity() -> Codebook:
    """ON/OFF codes of the Etekcity 433 MHz remote outlet."""
    return Codebook({"ON": ETEKCITY_ON, "OFF": ETEKCITY_OFF})


def parse_codebook(text: str) -> Codebook:
    entries: dict[str, str] = {}
    length = None
    used: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise CodebookError("expected 'NAME BITSTRING'", lineno)
        name, bits = parts
        if set(bits) - {"0", "1"}:
            raise CodebookError(f"invalid bitstring {bits!r}", lineno)
        if name in entries:
            raise CodebookError(f"duplicate name {name!r}", lineno)
        if bits in used:
            raise CodebookError(f"bitstring of {name!r} duplicates {used[bits]!r}", lineno)
        if length is not None and len(bits) != length:
            raise CodebookError(f"length {len(bits)} differs from {length}", lineno)
        length = len(bits)
        entries[name] = bits
        used[bits] = name
    return Codebook(entries)


def load_codebook(path) -> Codebook:
    with open(path, encoding="utf-8") as fh:
        return parse_codebook(fh.read())


def format_codebook(codebook: Codebook) -> str:
    return "".join(f"{name} {bits}\n" for name, bits in codebook.entries.items())


def hamming(a: str, b: str) -> int:
    if len(a) != len(b):
        raise ValueError("length mismatch")
    return sum(x != y for x, y in zip(a, b))


def match(frame: str, codebook: Codebook, max_hamming: int = 0) -> Match | None:
    """Closest entry within ``max_hamming`` bit errors.

    Returns ``None`` (unknown) when nothing qualifies, when two entries tie
    at the minimum distance, or when the lengths differ.
    """
    if max_hamming < 0:
        raise ValueError("max_hamming must be non-negative")
    best: list[tuple[int, str]] = []
    for name, bits in codebook.entries.items():
        if len(bits) != len(frame):
            continue
        d = hamming(frame, bits)
        if d <= max_hamming:
            best.append((d, name))
    if not best:
        return UNKNOWN
    best.sort()
    if len(best) > 1 and best[0][0] == best[1][0]:
        return UNKNOWN
    d, name = best[0]
    return Match(name, d)
