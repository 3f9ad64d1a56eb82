"""Classic LZ78 phrase parsing.

This is the plain-Python reference: a dict-per-node trie and a greedy
longest-match loop.  The stream compressors in :mod:`ralz._kernels` run their
own hash-table trie, and every test that checks phrase invariance compares the
two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import AlphabetError, MalformedStreamError

SYMBOL_BITS = {"bit": 1, "byte": 8}

SymbolsLike = Union[str, bytes, bytearray, Sequence[int], np.ndarray]


def symbol_bits(alphabet: str) -> int:
    try:
        return SYMBOL_BITS[alphabet]
    except KeyError:
        raise AlphabetError(f"unknown alphabet {alphabet!r}; use 'bit' or 'byte'") from None


def as_symbols(x: SymbolsLike, alphabet: str = "bit") -> np.ndarray:
    """Convert user input into a ``uint8`` array of symbol values.

    In bit mode a ``str``/``bytes`` input is read as ASCII ``'0'``/``'1'``
    characters; arrays and integer sequences are taken as symbol values.
    In byte mode ``str`` is UTF-8 encoded.
    """
    s = symbol_bits(alphabet)
    if isinstance(x, (str, bytes, bytearray, memoryview)):
        if isinstance(x, str):
            try:
                x = x.encode("latin-1" if s == 1 else "utf-8")
            except UnicodeEncodeError:
                raise AlphabetError("bit-mode text must contain only '0' and '1'") from None
        arr = np.frombuffer(bytes(x), dtype=np.uint8)
        if s == 1:
            arr = arr - np.uint8(48)  # wraps for anything below '0'; caught below
    else:
        a = np.asarray(x)
        if a.size and (a.min() < 0 or a.max() > 255):
            raise AlphabetError("symbol values must lie in [0, 255]")
        arr = a.astype(np.uint8)
    if s == 1 and arr.size and arr.max() > 1:
        bad = int(np.flatnonzero(arr > 1)[0])
        raise AlphabetError(f"symbol at position {bad + 1} is not a bit")
    return np.ascontiguousarray(arr)


def symbols_to_text(sym: np.ndarray, alphabet: str = "bit") -> bytes:
    """Inverse of :func:`as_symbols` for bytes-like output."""
    sym = np.asarray(sym, dtype=np.uint8)
    if symbol_bits(alphabet) == 1:
        return (sym + np.uint8(48)).tobytes()
    return sym.tobytes()


@dataclass
class TrieNode:
    index: int
    depth: int
    children: dict = field(default_factory=dict)
    special: bool = False
    special_depth: int = 0
    emitted_offset: int = -1


@dataclass(frozen=True)
class Phrase:
    parent_index: int
    symbol: int | None  # None only for a final phrase that ran out of input
    start: int
    length: int


def lz78_parse(x: SymbolsLike, alphabet: str = "bit") -> list[Phrase]:
    sym = as_symbols(x, alphabet)
    root = TrieNode(0, 0)
    nodes = [root]
    phrases: list[Phrase] = []
    node = root
    start = 1
    for pos, c in enumerate(sym.tolist(), start=1):
        child = node.children.get(c)
        if child is not None:
            node = child
            continue
        new = TrieNode(len(nodes), node.depth + 1)
        node.children[c] = new
        nodes.append(new)
        phrases.append(Phrase(node.index, c, start, new.depth))
        node = root
        start = pos + 1
    if node is not root:
        phrases.append(Phrase(node.index, None, start, node.depth))
    return phrases


def lz78_encode(x: SymbolsLike, alphabet: str = "bit") -> list[tuple[int, int | None]]:
    return [(p.parent_index, p.symbol) for p in lz78_parse(x, alphabet)]


def lz78_decode(codewords: Iterable[tuple[int, int | None]], n: int) -> np.ndarray:
    """Expand ``(parent_index, symbol)`` pairs and truncate to ``n`` symbols.

    A ``None`` symbol marks a final phrase equal to its parent's phrase.
    """
    phrases: list[tuple[int, ...]] = [()]
    out: list[int] = []
    for j, (i, b) in enumerate(codewords, start=1):
        if not 0 <= i < j:
            raise MalformedStreamError(f"codeword {j} points at phrase {i}")
        ph = phrases[i] if b is None else phrases[i] + (int(b),)
        phrases.append(ph)
        out.extend(ph)
    if len(out) < n:
        raise MalformedStreamError(f"codewords expand to {len(out)} symbols, expected {n}")
    return np.asarray(out[:n], dtype=np.uint8)
