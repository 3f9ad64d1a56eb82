"""Randomized scheme: mostly one-word codewords, O(log n + 1/eps^2) access.

Each phrase independently becomes *special* with probability ``p_special``.
A special codeword additionally stores its tree depth, its nearest special
ancestor and a long-jump special ancestor, so the special nodes on any root
path form a spanner line.  Every ``B`` words a position codeword records the
start of the next phrase, which makes the phrase containing a position
findable by binary search.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import _kernels as K
from .codec import Header, Scheme, WordStream
from .encoder import (AccessTrace, Compressor, check_position, compress_with,
                      decode_phrase_arrays, decompress, open_prefix,
                      raise_for_status)
from .errors import (MalformedStreamError, ParameterError, SpannerIntegrityError,
                     WeakEpsilonWarning)
from .lz78 import SymbolsLike, as_symbols, symbol_bits
from .spanner import block_length, jump_target

COIN_SCALE = 40  # both the coin bias eps/40 and the block length 40/eps


@dataclass(frozen=True)
class SchemeParams:
    """Parameters of a randomized stream.

    Build with :meth:`from_epsilon` (``p_special = eps/40``, ``B = ceil(40/eps)``)
    or :meth:`from_alpha` (``p_special = alpha``, ``B = ceil(1/alpha)``).
    """

    p_special: Fraction
    B: int
    n_max: int
    seed: int = 0
    L: int = 0
    epsilon: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "p_special", Fraction(self.p_special))
        if not 0 <= self.p_special <= 1:
            raise ParameterError("p_special must lie in [0, 1]")
        if self.B < 3:
            raise ParameterError("B must be >= 3")
        if self.n_max < 1:
            raise ParameterError("n_max must be >= 1")
        if self.L == 0:
            object.__setattr__(self, "L", block_length(self.n_max))

    @classmethod
    def from_epsilon(cls, epsilon: float, n_max: int, seed: int = 0) -> "SchemeParams":
        if not 0 < epsilon <= 1:
            raise ParameterError(f"epsilon must lie in (0, 1], got {epsilon}")
        if epsilon < weak_epsilon_threshold(n_max):
            warnings.warn(
                f"epsilon={epsilon} is below {weak_epsilon_threshold(n_max):.3g}; "
                "the overhead bound is no longer high-probability for n_max="
                f"{n_max}", WeakEpsilonWarning, stacklevel=2)
        eps = Fraction(epsilon).limit_denominator(1 << 20)
        return cls(eps / COIN_SCALE, math.ceil(COIN_SCALE / eps), n_max, seed,
                   epsilon=float(epsilon))

    @classmethod
    def from_alpha(cls, alpha: float, n_max: int, seed: int = 0,
                   B: Optional[int] = None) -> "SchemeParams":
        a = Fraction(alpha).limit_denominator(1 << 20)
        if B is None:
            if a == 0:
                raise ParameterError("alpha = 0 needs an explicit B")
            B = max(3, math.ceil(1 / a))
        return cls(a, B, n_max, seed)

    def header(self, alphabet: str = "bit") -> Header:
        return Header(Scheme.RANDOMIZED, self.n_max, symbol_bits(alphabet), self.L,
                      self.B, self.p_special, self.seed)


def weak_epsilon_threshold(n_max: int) -> float:
    """Below this epsilon the overhead guarantee is no longer high-probability."""
    return COIN_SCALE * block_length(n_max) / math.sqrt(n_max)


def _require_rand(stream: WordStream) -> None:
    if stream.header.scheme != Scheme.RANDOMIZED:
        raise ParameterError(f"expected a randomized stream, got {stream.header.scheme.name}")


def _args(stream: WordStream):
    h = stream.header
    return h.symbol_bits, h.L, h.B, h.delim_special, h.delim_position


def rand_compressor(params: SchemeParams, alphabet: str = "bit") -> Compressor:
    return Compressor(params.header(alphabet))


def rand_compress(x: SymbolsLike, params: SchemeParams, alphabet: str = "bit") -> WordStream:
    return compress_with(params.header(alphabet), as_symbols(x, alphabet))


def rand_decompress(stream: WordStream) -> np.ndarray:
    _require_rand(stream)
    return decompress(stream)


def _check_offset(stream: WordStream, offset: int) -> None:
    w = stream.words
    if not 0 <= offset < w.size or w[offset] == stream.header.delim_position:
        raise ParameterError(f"offset {offset} is not a phrase codeword")


def find_depth(stream: WordStream, offset: int, trace: Optional[AccessTrace] = None) -> int:
    """Tree depth of the phrase whose codeword starts at ``offset``."""
    _require_rand(stream)
    _check_offset(stream, offset)
    s, _, _, ds, dp = _args(stream)
    tr = np.zeros(K.N_TRACE, np.int64)
    d = K.rand_find_depth(stream.words, offset, s, ds, dp, tr)
    raise_for_status(int(d))
    if trace is not None:
        trace.add(tr)
    return int(d)


def find_node_by_depth(stream: WordStream, offset: int, d: int,
                       trace: Optional[AccessTrace] = None) -> int:
    """Offset of the ancestor at depth ``d`` of the phrase at ``offset``."""
    depth = find_depth(stream, offset)
    if not 1 <= d <= depth:
        raise ParameterError(f"target depth {d} outside [1, {depth}]")
    s, L, _, ds, _ = _args(stream)
    tr = np.zeros(K.N_TRACE, np.int64)
    off = K.find_node_by_depth(stream.words, offset, depth, d, s, L, ds, tr)
    raise_for_status(int(off))
    if trace is not None:
        trace.add(tr)
    return int(off)


def rand_access_many(stream: WordStream, ells, with_traces: bool = False):
    _require_rand(stream)
    ells = check_position(stream, ells)
    s, L, B, ds, dp = _args(stream)
    out = np.zeros(ells.size, np.uint8)
    traces = np.zeros((ells.size, K.N_TRACE), np.int64)
    raise_for_status(K.rand_access_batch(stream.words, ells, s, L, B, ds, dp, out, traces))
    return (out, traces) if with_traces else out


def rand_access(stream: WordStream, ell: int, trace: Optional[AccessTrace] = None) -> int:
    out, traces = rand_access_many(stream, [ell], with_traces=True)
    if trace is not None:
        trace.add(traces[0])
    return int(out[0])


def rand_extract(stream: WordStream, l1: int, l2: int,
                 trace: Optional[AccessTrace] = None) -> np.ndarray:
    _require_rand(stream)
    if l1 > l2:
        raise ParameterError(f"empty range {l1}:{l2}")
    check_position(stream, [l1, l2])
    s, L, B, ds, dp = _args(stream)
    out = np.zeros(l2 - l1 + 1, np.uint8)
    tr = np.zeros(K.N_TRACE, np.int64)
    raise_for_status(K.rand_extract(stream.words, l1, l2, s, L, B, ds, dp, out, tr))
    if trace is not None:
        trace.add(tr)
    return out


def codeword_boundaries(stream: WordStream) -> np.ndarray:
    """Word offsets at which a whole-codeword prefix may be cut (including the end)."""
    w = stream.words
    ds, dp = stream.header.delim_special, stream.header.delim_position
    cuts = [0]
    off = 0
    while off < w.size:
        off += 5 if w[off] == ds else 2 if w[off] == dp else 1
        cuts.append(off)
    if cuts[-1] != w.size:
        raise MalformedStreamError("last codeword runs past the stream end")
    return np.asarray(cuts, np.int64)


def prefix_at(stream: WordStream, n_words: int) -> WordStream:
    """Whole-codeword prefix with its symbol count, as an online reader sees it."""
    return open_prefix(stream.header, stream.words[:n_words], stream.n)


@dataclass
class AuditReport:
    phrases: int
    specials: int
    max_special_depth: int
    special_depth: np.ndarray = field(repr=False)


def audit_randomized(stream: WordStream) -> AuditReport:
    """Recompute special depths and check both special links of every special phrase."""
    _require_rand(stream)
    parent, _, depth, _, sp, sa, m, _ = decode_phrase_arrays(stream)
    L = stream.header.L
    is_special = sp[: m + 1] >= 0
    sdepth = np.full(m + 1, -1, np.int64)
    nearest = np.zeros(m + 1, np.int64)  # nearest special proper ancestor (0 = root)
    chain: dict[int, list[int]] = {0: []}  # special nodes on the root path, top first
    for j in range(1, m + 1):
        par = int(parent[j])
        above = chain[par] if par in chain else None
        if above is None:
            raise MalformedStreamError(f"phrase {j} has an unknown parent {par}")
        nearest[j] = above[-1] if above else 0
        if is_special[j]:
            d = len(above)
            sdepth[j] = d
            if sp[j] != nearest[j]:
                raise SpannerIntegrityError(
                    f"phrase {j}: special parent {sp[j]}, nearest special ancestor {nearest[j]}")
            want = above[jump_target(d, L)] if d > 0 else 0
            if sa[j] != want:
                raise SpannerIntegrityError(
                    f"phrase {j}: special ancestor {sa[j]}, expected {want} "
                    f"at special depth {jump_target(d, L) if d else 0}")
            chain[j] = above + [j]
        else:
            chain[j] = above
    return AuditReport(m, int(is_special[1:].sum()),
                       int(sdepth.max()) if m else -1, sdepth)
