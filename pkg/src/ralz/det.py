"""Deterministic scheme: three words per phrase, O(log n) access.

Each phrase is stored as ``[p, parent+1 | symbol, ancestor+1]`` where ``p``
is its start position and the ancestor sits at depth ``jump_target(depth)``.
Access binary-searches the ``p`` column, then walks the spanner from the
phrase's depth to the wanted one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from ._jit import USE_NUMBA
from .codec import Header, Scheme, WordStream
from .encoder import AccessTrace, check_position, compress_with, raise_for_status
from .errors import ParameterError
from .lz78 import SymbolsLike, as_symbols, symbol_bits
from .spanner import block_length


@dataclass(frozen=True)
class DetCodewordView:
    p: int
    parent_index: int
    ancestor_index: int
    symbol: int


def det_header(n_max: int, alphabet: str = "bit") -> Header:
    return Header(Scheme.DETERMINISTIC, n_max, symbol_bits(alphabet), block_length(n_max))


def det_compress(x: SymbolsLike, n_max: Optional[int] = None, alphabet: str = "bit") -> WordStream:
    sym = as_symbols(x, alphabet)
    return compress_with(det_header(n_max or max(sym.size, 1), alphabet), sym)


def _require_det(stream: WordStream) -> None:
    if stream.header.scheme != Scheme.DETERMINISTIC:
        raise ParameterError(f"expected a deterministic stream, got {stream.header.scheme.name}")


def det_codewords(stream: WordStream) -> list[DetCodewordView]:
    _require_det(stream)
    s = stream.header.symbol_bits
    w = stream.words.reshape(-1, 3)
    return [DetCodewordView(int(p), int(pw >> s) - 1, int(a) - 1, int(pw & ((1 << s) - 1)))
            for p, pw, a in w]


def det_access_many(stream: WordStream, ells, with_traces: bool = False):
    """Symbols at 1-based positions ``ells``; optionally the per-access traces."""
    _require_det(stream)
    ells = check_position(stream, ells)
    h = stream.header
    if not USE_NUMBA and not with_traces:
        return K.det_access_numpy(stream.words, ells, h.symbol_bits, h.L)
    out = np.zeros(ells.size, np.uint8)
    traces = np.zeros((ells.size, K.N_TRACE), np.int64)
    raise_for_status(K.det_access_batch(stream.words, ells, h.symbol_bits, h.L, out, traces))
    return (out, traces) if with_traces else out


def det_access(stream: WordStream, ell: int, trace: Optional[AccessTrace] = None) -> int:
    out, traces = det_access_many(stream, [ell], with_traces=True)
    if trace is not None:
        trace.add(traces[0])
    return int(out[0])


def det_extract(stream: WordStream, l1: int, l2: int,
                trace: Optional[AccessTrace] = None) -> np.ndarray:
    _require_det(stream)
    if l1 > l2:
        raise ParameterError(f"empty range {l1}:{l2}")
    check_position(stream, [l1, l2])
    h = stream.header
    out = np.zeros(l2 - l1 + 1, np.uint8)
    tr = np.zeros(K.N_TRACE, np.int64)
    raise_for_status(K.det_extract(stream.words, l1, l2, h.symbol_bits, h.L, out, tr))
    if trace is not None:
        trace.add(tr)
    return out
