"""Scheme-agnostic entry points used by the CLI and the harness."""

from __future__ import annotations

from typing import Optional, Union

import numpy as np

from . import _kernels as K
from .codec import Header, Scheme, WordStream
from .det import det_access_many, det_extract, det_header
from .encoder import AccessTrace, compress_with, decompress, raise_for_status
from .errors import NoRandomAccessError, ParameterError
from .lz78 import SymbolsLike, as_symbols, symbol_bits
from .rand import SchemeParams, rand_access_many, rand_extract
from .spanner import block_length


def baseline_header(n_max: int, alphabet: str = "bit") -> Header:
    return Header(Scheme.BASELINE, n_max, symbol_bits(alphabet), block_length(n_max))


def lz78_compress(x: SymbolsLike, n_max: Optional[int] = None, alphabet: str = "bit") -> WordStream:
    sym = as_symbols(x, alphabet)
    return compress_with(baseline_header(n_max or max(sym.size, 1), alphabet), sym)


def make_header(scheme: Union[str, Scheme], n_max: int, alphabet: str = "bit",
                epsilon: Optional[float] = None, alpha: Optional[float] = None,
                seed: int = 0, B: Optional[int] = None) -> Header:
    scheme = Scheme.parse(scheme)
    if scheme == Scheme.BASELINE:
        return baseline_header(n_max, alphabet)
    if scheme == Scheme.DETERMINISTIC:
        return det_header(n_max, alphabet)
    if epsilon is not None and alpha is not None:
        raise ParameterError("give epsilon or alpha, not both")
    if alpha is not None:
        params = SchemeParams.from_alpha(alpha, n_max, seed, B)
    else:
        params = SchemeParams.from_epsilon(0.5 if epsilon is None else epsilon, n_max, seed)
    return params.header(alphabet)


def compress(x: SymbolsLike, scheme: Union[str, Scheme] = "rand", alphabet: str = "bit",
             n_max: Optional[int] = None, **params) -> WordStream:
    sym = as_symbols(x, alphabet)
    header = make_header(scheme, n_max or max(sym.size, 1), alphabet, **params)
    return compress_with(header, sym)


def access_many(stream: WordStream, ells, with_traces: bool = False):
    scheme = stream.header.scheme
    if scheme == Scheme.DETERMINISTIC:
        return det_access_many(stream, ells, with_traces)
    if scheme == Scheme.RANDOMIZED:
        return rand_access_many(stream, ells, with_traces)
    raise NoRandomAccessError("plain LZ78 streams have no random access; decompress instead")


def access(stream: WordStream, ell: int, trace: Optional[AccessTrace] = None) -> int:
    out, traces = access_many(stream, [ell], with_traces=True)
    if trace is not None:
        trace.add(traces[0])
    return int(out[0])


def extract(stream: WordStream, l1: int, l2: int,
            trace: Optional[AccessTrace] = None) -> np.ndarray:
    scheme = stream.header.scheme
    if scheme == Scheme.DETERMINISTIC:
        return det_extract(stream, l1, l2, trace)
    if scheme == Scheme.RANDOMIZED:
        return rand_extract(stream, l1, l2, trace)
    raise NoRandomAccessError("plain LZ78 streams have no random access; decompress instead")


def sequential_access(stream: WordStream, ell: int, trace: Optional[AccessTrace] = None) -> int:
    """Symbol lookup in a plain LZ78 stream by walking it from the start."""
    if stream.header.scheme != Scheme.BASELINE:
        raise ParameterError("sequential access is defined for plain LZ78 streams")
    tr = np.zeros(K.N_TRACE, np.int64)
    v = K.lz78_sequential_access(stream.words, int(ell), stream.header.symbol_bits, tr)
    raise_for_status(int(v))
    if trace is not None:
        trace.add(tr)
    return int(v)


__all__ = ["access", "access_many", "baseline_header", "compress", "decompress",
           "extract", "lz78_compress", "make_header", "sequential_access"]
