"""Transitive-closure spanner on a backward-directed line.

Levels ``0..n-1``; every level ``i >= 1`` has a parent edge ``i -> i-1`` and
one long jump ``i -> jump_target(i, L)``.  Walking from ``t`` down to ``r``
takes parent edges until the level is the last one of its block (``i mod L ==
L-1``), then greedily jumps whenever the jump does not pass ``r``.  With
``L = ceil(log2 n)`` this reaches ``r`` in at most ``4 * L`` hops.

Both random-access schemes use the same decision rule (:func:`spanner_move`);
the deterministic scheme runs it over trie depths and the randomized scheme
over depths of the special-node subsequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from ._jit import jit
from .errors import ParameterError, SpannerIntegrityError

STOP = 0
PARENT = 1
JUMP = 2


@dataclass(frozen=True)
class SpannerConfig:
    L: int
    n_cap: int

    def __post_init__(self):
        if self.L < 1:
            raise ParameterError("block length L must be >= 1")

    @classmethod
    def for_capacity(cls, n_cap: int) -> "SpannerConfig":
        return cls(block_length(n_cap), n_cap)


def block_length(n_cap: int) -> int:
    if n_cap < 1:
        raise ParameterError("capacity must be >= 1")
    return max(1, math.ceil(math.log2(n_cap)))


@jit
def f(i, L):
    return i % L


@jit
def jump_target(i, L):
    t = i - (1 << (i % L)) * L
    return t if t > 0 else 0


@jit
def spanner_move(u, r, L, aligned):
    """Next edge to take from level ``u`` towards ``r``.

    ``aligned`` is false until the walk has reached a level with ``u mod L ==
    L-1`` (phase one).  Returns one of STOP / PARENT / JUMP.
    """
    if u == r:
        return 0
    if not aligned and u % L != L - 1:
        return 1
    if jump_target(u, L) >= r:
        return 2
    return 1


def navigate(
    t: int,
    r: int,
    L: int,
    step: Callable[[], Optional[int]],
    jump: Callable[[], Optional[int]],
    probe: Optional[Callable[[], Optional[int]]] = None,
) -> int:
    """Walk from level ``t`` to level ``r`` through the callbacks; return hops.

    ``step`` takes the parent edge, ``jump`` the long edge.  Either may return
    the level it landed on, which is checked against the line arithmetic.
    ``probe``, if given, reports the current node's jump target before a jump
    decision is made.
    """
    if not 0 <= r <= t:
        raise ParameterError(f"need 0 <= r <= t, got t={t}, r={r}")
    # plain-Python bodies: calling compiled code per hop costs more than it saves
    move_of, target_of = spanner_move.py_func, jump_target.py_func
    u = t
    hops = 0
    aligned = False
    while True:
        if not aligned and u % L == L - 1:
            aligned = True
        move = move_of(u, r, L, aligned)
        if move == STOP:
            return hops
        if move == JUMP:
            expect = target_of(u, L)
            if probe is not None:
                seen = probe()
                if seen is not None and seen != expect:
                    raise SpannerIntegrityError(
                        f"level {u}: jump edge leads to {seen}, expected {expect}"
                    )
            landed = jump()
        else:
            expect = u - 1
            landed = step()
        if landed is not None and landed != expect:
            raise SpannerIntegrityError(f"level {u}: edge landed on {landed}, expected {expect}")
        if expect < r:
            raise SpannerIntegrityError(f"walk overshot target {r} at level {expect}")
        u = expect
        hops += 1


def hop_bound(n: int) -> int:
    """The ``4 * ceil(log2 n)`` path-length guarantee."""
    return 4 * block_length(n)
