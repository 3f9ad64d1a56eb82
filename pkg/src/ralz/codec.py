"""Serialized format: header, fixed-width word stream, codeword layouts.

File layout::

    header  48 bytes, little-endian  (see ``HEADER_STRUCT``)
    words   w-bit unsigned words, MSB-first, byte-padded at the very end

The word section ends with a two-word footer ``[DELIM_POSITION, n]``.  Word
values ``2**w - 1`` and ``2**w - 2`` are reserved delimiters and mark the
start of special and position codewords respectively.

Links inside codewords are stored ``+1`` so that ``0`` always means the
trie root: randomized streams link by word offset, deterministic and plain
LZ78 streams by phrase ordinal.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import BinaryIO, Iterator, Optional, Union

import numpy as np

from ._jit import jit
from .errors import MalformedStreamError, ParameterError, TruncatedStreamError

MAGIC = b"RALZ"
VERSION = 1
HEADER_STRUCT = struct.Struct("<4sHBBQIIQQQ")
FOOTER_WORDS = 2
POSITION_WINDOW = 7  # longest codeword (5) + a position codeword (2)

MAX_N = 1 << 40


class Scheme(enum.IntEnum):
    BASELINE = 0
    DETERMINISTIC = 1
    RANDOMIZED = 2

    @classmethod
    def parse(cls, name: Union[str, int, "Scheme"]) -> "Scheme":
        if isinstance(name, (int, Scheme)):
            return cls(name)
        aliases = {
            "lz78": cls.BASELINE, "baseline": cls.BASELINE,
            "det": cls.DETERMINISTIC, "deterministic": cls.DETERMINISTIC,
            "rand": cls.RANDOMIZED, "randomized": cls.RANDOMIZED,
        }
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ParameterError(f"unknown scheme {name!r}") from None


def word_width(n_max: int, s: int) -> int:
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    if s not in (1, 8):
        raise ParameterError("symbol width must be 1 or 8 bits")
    return math.ceil(math.log2(n_max + 2)) + s + 3


@dataclass(frozen=True)
class Header:
    scheme: Scheme
    n_max: int
    symbol_bits: int
    L: int
    B: int = 0
    p_special: Fraction = Fraction(0)
    seed: int = 0
    version: int = VERSION

    def __post_init__(self):
        if not 1 <= self.n_max <= MAX_N:
            raise ParameterError(f"n_max must lie in [1, 2**40], got {self.n_max}")
        if self.symbol_bits not in (1, 8):
            raise ParameterError("symbol_bits must be 1 or 8")
        if self.L < 1:
            raise ParameterError("L must be >= 1")
        if self.scheme == Scheme.RANDOMIZED:
            if self.B < 3:
                raise ParameterError("position-block length B must be >= 3")
            if not 0 <= self.p_special <= 1:
                raise ParameterError("special probability must lie in [0, 1]")

    @property
    def w(self) -> int:
        return word_width(self.n_max, self.symbol_bits)

    @property
    def delim_special(self) -> int:
        return (1 << self.w) - 1

    @property
    def delim_position(self) -> int:
        return (1 << self.w) - 2

    @property
    def alphabet(self) -> str:
        return "bit" if self.symbol_bits == 1 else "byte"

    def pack(self) -> bytes:
        p = Fraction(self.p_special)
        return HEADER_STRUCT.pack(
            MAGIC, self.version, int(self.scheme), self.symbol_bits, self.n_max,
            self.L, self.B, p.numerator, p.denominator, self.seed & (2**64 - 1),
        )

    @classmethod
    def unpack(cls, buf: bytes) -> "Header":
        if len(buf) < HEADER_STRUCT.size:
            raise TruncatedStreamError("stream shorter than its header")
        magic, version, scheme, s, n_max, L, B, num, den, seed = HEADER_STRUCT.unpack_from(buf)
        if magic != MAGIC:
            raise MalformedStreamError(f"bad magic {magic!r}")
        if version != VERSION:
            raise MalformedStreamError(f"unsupported version {version}")
        if den == 0:
            raise MalformedStreamError("zero denominator in special probability")
        try:
            return cls(Scheme(scheme), n_max, s, L, B, Fraction(num, den), seed, version)
        except (ValueError, ParameterError) as exc:
            raise MalformedStreamError(f"invalid header: {exc}") from None


# --------------------------------------------------------------------------
# bit packing


def pack_words(words: np.ndarray, w: int) -> bytes:
    """MSB-first packing of ``w``-bit words, zero-padded to a byte."""
    words = np.asarray(words, dtype=np.uint64)
    if words.size == 0:
        return b""
    shifts = np.arange(w - 1, -1, -1, dtype=np.uint64)
    bits = ((words[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits.ravel()).tobytes()


def unpack_words(buf: bytes, w: int, count: Optional[int] = None) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8))
    if count is None:
        count = bits.size // w
    if count * w > bits.size:
        raise TruncatedStreamError(f"need {count * w} bits, have {bits.size}")
    bits = bits[: count * w].reshape(count, w).astype(np.uint64)
    shifts = np.arange(w - 1, -1, -1, dtype=np.uint64)
    return (bits << shifts).sum(axis=1, dtype=np.uint64).astype(np.int64)


class BitPacker:
    """Incremental MSB-first packer; carries partial bytes between calls."""

    def __init__(self, w: int):
        self.w = w
        self._carry = np.zeros(0, dtype=np.uint8)

    def feed(self, words: np.ndarray) -> bytes:
        words = np.asarray(words, dtype=np.uint64)
        if words.size == 0:
            return b""
        shifts = np.arange(self.w - 1, -1, -1, dtype=np.uint64)
        bits = ((words[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).ravel()
        if self._carry.size:
            bits = np.concatenate([self._carry, bits])
        whole = bits.size - bits.size % 8
        self._carry = bits[whole:]
        return np.packbits(bits[:whole]).tobytes()

    def flush(self) -> bytes:
        out = np.packbits(self._carry).tobytes() if self._carry.size else b""
        self._carry = np.zeros(0, dtype=np.uint8)
        return out


# --------------------------------------------------------------------------
# streams


@dataclass
class WordStream:
    """Decoded stream: header plus data words (footer split off).

    ``n`` is the number of encoded symbols.  For a finalized stream it comes
    from the footer; for an online prefix it is the length of the encoded
    input prefix.
    """

    header: Header
    words: np.ndarray
    n: int
    finalized: bool = True
    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        self.words = np.ascontiguousarray(self.words, dtype=np.int64)

    @property
    def w(self) -> int:
        return self.header.w

    @property
    def data_words(self) -> int:
        return int(self.words.size)

    @property
    def total_words(self) -> int:
        return self.data_words + (FOOTER_WORDS if self.finalized else 0)

    def footer(self) -> np.ndarray:
        return np.array([self.header.delim_position, self.n], dtype=np.int64)

    def all_words(self) -> np.ndarray:
        if not self.finalized:
            return self.words
        return np.concatenate([self.words, self.footer()])

    def to_bytes(self) -> bytes:
        if not self.finalized:
            raise ParameterError("only finalized streams are serialized")
        return self.header.pack() + pack_words(self.all_words(), self.w)

    @classmethod
    def from_bytes(cls, buf: bytes) -> "WordStream":
        header = Header.unpack(buf)
        words = unpack_words(buf[HEADER_STRUCT.size:], header.w)
        dp = header.delim_position
        # Byte padding can hold at most one extra all-zero word when w < 8.
        if words.size >= 3 and words[-2] != dp and words[-3] == dp and words[-1] == 0:
            words = words[:-1]
        if words.size < FOOTER_WORDS or words[-2] != dp:
            raise TruncatedStreamError("footer not found; stream is truncated")
        n = int(words[-1])
        if n > header.n_max:
            raise MalformedStreamError(f"footer length {n} exceeds n_max {header.n_max}")
        return cls(header, words[:-FOOTER_WORDS], n, True)

    @classmethod
    def split_bytes(cls, buf: bytes) -> tuple[Header, np.ndarray]:
        """Header and every complete word, without requiring a footer.

        When the body could hold one more word than the writer produced (only
        possible for ``w < 8``), the shorter reading is returned; dropping a
        trailing word keeps it a valid prefix.
        """
        header = Header.unpack(buf)
        body = buf[HEADER_STRUCT.size:]
        nbits = 8 * len(body)
        count = max(0, -(-(nbits - 7) // header.w))
        return header, unpack_words(body, header.w, min(count, nbits // header.w))

    def prefix(self, n_words: int, n_symbols: int) -> "WordStream":
        """Whole-codeword prefix of this stream covering ``n_symbols`` symbols."""
        return WordStream(self.header, self.words[:n_words], n_symbols, False)

    def __eq__(self, other):
        if not isinstance(other, WordStream):
            return NotImplemented
        return (self.header == other.header and self.n == other.n
                and self.finalized == other.finalized
                and np.array_equal(self.words, other.words))


def save(stream: WordStream, dest: Union[str, BinaryIO]) -> None:
    data = stream.to_bytes()
    if isinstance(dest, str):
        with open(dest, "wb") as fh:
            fh.write(data)
    else:
        dest.write(data)


def load(src: Union[str, bytes, BinaryIO]) -> WordStream:
    if isinstance(src, bytes):
        return WordStream.from_bytes(src)
    if isinstance(src, str):
        with open(src, "rb") as fh:
            return WordStream.from_bytes(fh.read())
    return WordStream.from_bytes(src.read())


# --------------------------------------------------------------------------
# framed transport: each frame carries whole codewords only
#
#   frame := u32 word_count (little-endian) | packed words, byte-padded
#   a frame with word_count 0 ends the transport; the footer travels as the
#   last non-empty frame.

FRAME_STRUCT = struct.Struct("<I")


def write_frame(fh: BinaryIO, words: np.ndarray, w: int) -> None:
    fh.write(FRAME_STRUCT.pack(len(words)))
    fh.write(pack_words(words, w))


def read_frames(fh: BinaryIO, w: int) -> Iterator[np.ndarray]:
    while True:
        head = fh.read(FRAME_STRUCT.size)
        if not head:
            return
        if len(head) < FRAME_STRUCT.size:
            raise TruncatedStreamError("partial frame header")
        (count,) = FRAME_STRUCT.unpack(head)
        if count == 0:
            return
        nbytes = (count * w + 7) // 8
        body = fh.read(nbytes)
        if len(body) < nbytes:
            raise TruncatedStreamError("partial frame body")
        yield unpack_words(body, w, count)


# --------------------------------------------------------------------------
# codeword layouts


@dataclass(frozen=True)
class Simple:
    parent_link: int
    symbol: int


@dataclass(frozen=True)
class Special:
    depth: int
    parent_link: int
    symbol: int
    special_parent_link: int
    special_ancestor_link: int


@dataclass(frozen=True)
class Position:
    p: int


@dataclass(frozen=True)
class Deterministic:
    p: int
    parent_index: int
    ancestor_index: int
    symbol: int


Codeword = Union[Simple, Special, Position, Deterministic]


def encode_codeword(cw: Codeword, header: Header) -> list[int]:
    s = header.symbol_bits
    if isinstance(cw, Simple):
        out = [(cw.parent_link << s) | cw.symbol]
    elif isinstance(cw, Special):
        out = [header.delim_special, cw.depth, (cw.parent_link << s) | cw.symbol,
               cw.special_parent_link, cw.special_ancestor_link]
    elif isinstance(cw, Position):
        out = [header.delim_position, cw.p]
    elif isinstance(cw, Deterministic):
        out = [cw.p, ((cw.parent_index + 1) << s) | cw.symbol, cw.ancestor_index + 1]
    else:
        raise TypeError(f"not a codeword: {cw!r}")
    if not 0 <= getattr(cw, "symbol", 0) < (1 << s):
        raise ParameterError(f"symbol out of range for {s}-bit alphabet")
    data = out[1:] if isinstance(cw, (Special, Position)) else out
    if any(not 0 <= v < header.delim_position for v in data):
        raise ParameterError(f"a field of {cw!r} does not fit below the delimiters")
    return out


class StreamBuilder:
    """Append codewords one at a time; used for hand-built streams."""

    def __init__(self, header: Header):
        self.header = header
        self._words: list[int] = []

    @property
    def offset(self) -> int:
        return len(self._words)

    def write(self, cw: Codeword) -> int:
        at = len(self._words)
        self._words.extend(encode_codeword(cw, self.header))
        return at

    def finish(self, n: int) -> WordStream:
        return WordStream(self.header, np.array(self._words, dtype=np.int64), n, True)


def write_codeword(builder: StreamBuilder, cw: Codeword) -> int:
    return builder.write(cw)


def read_codeword_at(stream: WordStream, offset: int) -> tuple[Codeword, int]:
    """Decode the codeword starting at ``offset``; return it and its length."""
    h = stream.header
    words = stream.words
    s = h.symbol_bits
    smask = (1 << s) - 1
    if not 0 <= offset < words.size:
        raise TruncatedStreamError(f"offset {offset} outside the stream")

    def need(k):
        if offset + k > words.size:
            raise TruncatedStreamError(f"codeword at {offset} runs past the stream end")

    def link(v, what):
        # links are +1 encoded and must point strictly backwards
        if v > offset:
            raise MalformedStreamError(f"codeword at {offset}: {what} link {v} points forward")
        return v

    lead = int(words[offset])
    if h.scheme == Scheme.DETERMINISTIC:
        need(3)
        idx = offset // 3 + 1
        if offset % 3:
            raise MalformedStreamError(f"offset {offset} is not a codeword boundary")
        p, pw, a = (int(v) for v in words[offset:offset + 3])
        par, anc = (pw >> s) - 1, a - 1
        if not (0 <= par < idx and 0 <= anc < idx):
            raise MalformedStreamError(f"codeword {idx}: parent/ancestor index out of range")
        return Deterministic(p, par, anc, pw & smask), 3
    if lead == h.delim_special:
        if h.scheme != Scheme.RANDOMIZED:
            raise MalformedStreamError(f"special delimiter at {offset} in a non-randomized stream")
        need(5)
        _, depth, pw, sp, sa = (int(v) for v in words[offset:offset + 5])
        return Special(depth, link(pw >> s, "parent"), pw & smask,
                       link(sp, "special parent"), link(sa, "special ancestor")), 5
    if lead == h.delim_position:
        need(2)
        return Position(int(words[offset + 1])), 2
    if h.scheme == Scheme.BASELINE:
        par = lead >> s
        if par > offset:
            raise MalformedStreamError(f"codeword {offset + 1}: parent {par} points forward")
        return Simple(par, lead & smask), 1
    return Simple(link(lead >> s, "parent"), lead & smask), 1


@jit
def _find_position(words, n_data, start, dp):
    end = start + 8
    if end > n_data:
        end = n_data
    for i in range(start, end):
        if words[i] == dp:
            return i
    return -1


def find_position_codeword(stream: WordStream, k: int) -> Optional[int]:
    """Offset of the first position codeword in words ``[k*B, k*B + 7]``.

    Returns ``None`` when the window holds none: before the first anchor was
    emitted, or past the end of the stream.
    """
    h = stream.header
    if h.scheme != Scheme.RANDOMIZED:
        raise ParameterError("position codewords exist only in randomized streams")
    off = _find_position(stream.words, stream.words.size, k * h.B, h.delim_position)
    return None if off < 0 else int(off)


def iter_codewords(stream: WordStream) -> Iterator[tuple[int, Codeword]]:
    off = 0
    while off < stream.words.size:
        cw, k = read_codeword_at(stream, off)
        yield off, cw
        off += k


def with_words(stream: WordStream, words: np.ndarray) -> WordStream:
    return replace(stream, words=np.asarray(words, dtype=np.int64))
