"""Online compressor shared by the three stream layouts, and decoding."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from ._jit import USE_NUMBA
from .codec import FOOTER_WORDS, Header, Scheme, WordStream
from .errors import (CapacityError, MalformedStreamError, ParameterError,
                     PositionError, TruncatedStreamError)
from .lz78 import SymbolsLike, as_symbols

COIN_BLOCK = 1 << 16


@dataclass
class AccessTrace:
    """Work done by one access or extraction."""

    codewords_read: int = 0
    parent_hops: int = 0
    spanner_hops: int = 0

    @property
    def node_visits(self) -> int:
        return self.codewords_read + self.parent_hops + self.spanner_hops

    @classmethod
    def from_row(cls, row) -> "AccessTrace":
        return cls(int(row[K.T_READ]), int(row[K.T_PARENT]), int(row[K.T_SPAN]))

    def add(self, row) -> None:
        self.codewords_read += int(row[K.T_READ])
        self.parent_hops += int(row[K.T_PARENT])
        self.spanner_hops += int(row[K.T_SPAN])


def raise_for_status(status: int, what: str = "stream") -> None:
    if status >= 0:
        return
    if status == K.ERR_TRUNCATED:
        raise TruncatedStreamError(f"{what} is truncated")
    if status == K.ERR_CAPACITY:
        raise CapacityError("input is longer than the declared n_max")
    if status == K.ERR_WIDTH:
        raise CapacityError("a field outgrew the word width; raise n_max")
    if status == K.ERR_RANGE:
        raise PositionError("position lies beyond the encoded data")
    raise MalformedStreamError(f"{what} is malformed")


class Compressor:
    """Single-writer online compressor.

    ``push`` consumes symbols and returns the words it emitted, always whole
    codewords.  After every push the committed prefix (``snapshot``) is a
    valid stream for every symbol that belongs to a completed phrase.
    """

    def __init__(self, header: Header):
        self.header = header
        n_max = header.n_max
        self._scheme = int(header.scheme)
        self._st = np.zeros(K.N_STATE, np.int64)
        cap = 1 << max(4, (2 * (n_max + 1) - 1).bit_length())
        self._keys = np.full(cap, -1, np.int64)
        self._vals = np.zeros(cap, np.int64)
        self._link = np.zeros(n_max + 2, np.int64)
        self._special = np.zeros(n_max + 2, np.uint8)
        self._path = np.zeros(n_max + 2, np.int64)
        self._coins = np.zeros(n_max + 2, np.uint8)
        self._coins_ready = 1  # index 0 is the root
        self._rng = np.random.Generator(np.random.PCG64(header.seed))
        self._chunks: list[np.ndarray] = []
        self._committed_words = 0
        self._encoded = 0
        self._lock = threading.Lock()
        self._final: Optional[WordStream] = None

    # -- bookkeeping

    def _kargs(self):
        h = self.header
        return (h.symbol_bits, h.L, max(h.B, 1), h.delim_position, h.delim_special,
                h.delim_position)

    def _draw_coins(self, upto: int) -> None:
        if self._scheme != K.RANDOMIZED:
            return
        upto = min(upto, self._coins.size)
        p = self.header.p_special
        while self._coins_ready < upto:
            draw = self._rng.integers(0, p.denominator, size=COIN_BLOCK)
            lo = self._coins_ready
            hi = min(lo + COIN_BLOCK, self._coins.size)
            self._coins[lo:hi] = draw[: hi - lo] < p.numerator
            self._coins_ready = lo + COIN_BLOCK

    def _commit(self, out: np.ndarray, k: int) -> np.ndarray:
        if k < 0:
            raise_for_status(k)
        words = out[:k].copy()
        with self._lock:
            if k:
                self._chunks.append(words)
                self._committed_words += k
            self._encoded = int(self._st[K.S_POS] - self._st[K.S_DEPTH])
        return words

    @property
    def committed_words(self) -> int:
        return self._committed_words

    @property
    def encoded_length(self) -> int:
        """Symbols covered by completed phrases."""
        return self._encoded

    @property
    def counts(self) -> dict:
        st = self._st
        return {"m": int(st[K.S_M]), "m1": int(st[K.S_M1]), "m2": int(st[K.S_M2]),
                "m3": int(st[K.S_M3])}

    # -- writer side

    def push(self, symbols: SymbolsLike) -> np.ndarray:
        if self._final is not None:
            raise ParameterError("compressor already finalized")
        if np.isscalar(symbols) and not isinstance(symbols, (str, bytes)):
            symbols = [symbols]
        x = as_symbols(symbols, self.header.alphabet)
        if x.size == 0:
            return np.zeros(0, np.int64)
        if int(self._st[K.S_POS]) + x.size > self.header.n_max:
            raise CapacityError(
                f"input exceeds n_max={self.header.n_max} "
                f"({int(self._st[K.S_POS]) + x.size} symbols)")
        self._draw_coins(int(self._st[K.S_M]) + x.size + 2)
        out = np.empty(7 * x.size + 8, np.int64)
        s, L, B, limit, ds, dp = self._kargs()
        k = K.compress_chunk(self._scheme, x, self._st, self._keys, self._vals,
                             self._link, self._special, self._path, self._coins, out,
                             s, L, B, limit, ds, dp, self.header.n_max)
        return self._commit(out, k)

    def finalize(self) -> np.ndarray:
        """Flush the last phrase and append the footer; returns the new words."""
        if self._final is not None:
            raise ParameterError("compressor already finalized")
        self._draw_coins(int(self._st[K.S_M]) + 2)
        out = np.empty(16, np.int64)
        s, L, B, limit, ds, dp = self._kargs()
        k = K.compress_finish(self._scheme, self._st, self._link, self._special,
                              self._path, self._coins, out, s, L, B, limit, ds, dp)
        tail = self._commit(out, k)
        n = int(self._st[K.S_POS])
        with self._lock:
            self._encoded = n
        self._final = WordStream(self.header, self._words(), n, True, self.counts)
        return np.concatenate([tail, self._final.footer()])

    def _words(self) -> np.ndarray:
        with self._lock:
            chunks = list(self._chunks)
        return np.concatenate(chunks) if chunks else np.zeros(0, np.int64)

    # -- reader side

    def snapshot(self) -> WordStream:
        """Committed whole-codeword prefix, usable for access while writing."""
        with self._lock:
            chunks = list(self._chunks)
            n = self._encoded
        words = np.concatenate(chunks) if chunks else np.zeros(0, np.int64)
        return WordStream(self.header, words, n, False, self.counts)

    def stream(self) -> WordStream:
        if self._final is None:
            raise ParameterError("call finalize() first")
        return self._final


def compress_with(header: Header, x: SymbolsLike) -> WordStream:
    c = Compressor(header)
    c.push(x)
    c.finalize()
    return c.stream()


# --------------------------------------------------------------------------
# decoding


def decode_phrase_arrays(stream: WordStream):
    h = stream.header
    res = K.decode_phrases(stream.words, int(h.scheme), h.symbol_bits, h.L,
                           h.delim_special, h.delim_position)
    raise_for_status(int(res[-1]))
    return res


def phrases(stream: WordStream) -> list[tuple[int, int]]:
    """``(parent_index, symbol)`` for every phrase in the stream."""
    parent, sym, _, _, _, _, m, _ = decode_phrase_arrays(stream)
    return list(zip(parent[1:m + 1].tolist(), sym[1:m + 1].tolist()))


def decompress(stream: WordStream) -> np.ndarray:
    parent, sym, depth, _, _, _, m, _ = decode_phrase_arrays(stream)
    if USE_NUMBA:
        out = K.expand(parent, sym, depth, m)
    else:
        out = K.expand_numpy(parent, sym, depth, m)
    n = stream.n
    if out.size < n or out.size > n + 1:
        raise MalformedStreamError(
            f"phrases cover {out.size} symbols but the stream declares {n}")
    return out[:n]


def check_position(stream: WordStream, ell) -> np.ndarray:
    ells = np.atleast_1d(np.asarray(ell, dtype=np.int64))
    if ells.size and (ells.min() < 1 or ells.max() > stream.n):
        raise PositionError(f"position outside [1, {stream.n}]")
    return ells


def accounting(stream: WordStream) -> dict:
    """Word-count breakdown recounted from the stream contents."""
    h = stream.header
    footer = FOOTER_WORDS if stream.finalized else 0
    if h.scheme == Scheme.RANDOMIZED:
        _, _, _, _, sp, _, m, _ = decode_phrase_arrays(stream)
        m2 = int((sp[1:m + 1] >= 0).sum())
        m3 = int((stream.words == h.delim_position).sum())
        return {"m": m, "m1": m - m2, "m2": m2, "m3": m3, "footer": footer,
                "total": stream.total_words, "per_simple": 1}
    per = 3 if h.scheme == Scheme.DETERMINISTIC else 1
    return {"m": stream.data_words // per, "m1": stream.data_words // per, "m2": 0, "m3": 0,
            "footer": footer, "total": stream.total_words, "per_simple": per}


def accounting_holds(acc: dict) -> bool:
    """``total = m1*c + 5*m2 + 2*m3 + footer`` with ``c`` words per plain codeword."""
    return (acc["total"] == acc["per_simple"] * acc["m1"] + 5 * acc["m2"] + 2 * acc["m3"]
            + acc["footer"] and acc["m1"] + acc["m2"] == acc["m"])


def open_prefix(header: Header, words: np.ndarray, n_cap: Optional[int] = None) -> WordStream:
    """Longest whole-codeword prefix of ``words`` as a readable, unfinalized stream.

    Its length ``n`` is the total length of the phrases it holds, capped at
    ``n_cap`` when the true input length is known.
    """
    words = np.ascontiguousarray(words, dtype=np.int64)
    res = K.decode_phrases(words, int(header.scheme), header.symbol_bits, header.L,
                           header.delim_special, header.delim_position)
    _, _, depth, offset, _, _, m, status = res
    if status not in (K.OK, K.ERR_TRUNCATED):
        raise_for_status(int(status))
    if status == K.OK:
        cut = words.size
    elif m == 0:
        cut = 0
    elif header.scheme == Scheme.RANDOMIZED:
        last = int(offset[m])
        cut = last + (5 if words[last] == header.delim_special else 1)
    else:
        cut = m * (3 if header.scheme == Scheme.DETERMINISTIC else 1)
    n = int(depth[1:m + 1].sum())
    if n_cap is not None:
        n = min(n, n_cap)
    return WordStream(header, words[:cut], n, False)
