from collections import deque

import pytest

from ralz import ParameterError, SpannerIntegrityError
from ralz.spanner import (SpannerConfig, block_length, f, hop_bound, jump_target,
                          navigate)


@pytest.mark.parametrize("i,L,want", [(0, 4, 0), (7, 4, 3), (9, 4, 1)])
def test_f(i, L, want):
    assert f(i, L) == want


@pytest.mark.parametrize("i,L,want", [(9, 4, 1), (5, 4, 0), (3, 4, 0), (7, 4, 0), (1, 1, 0)])
def test_jump_target(i, L, want):
    assert jump_target(i, L) == want


def test_config():
    assert SpannerConfig.for_capacity(1000).L == 10
    assert block_length(1) == 1
    with pytest.raises(ParameterError):
        SpannerConfig(0, 10)


def walk(t, r, L):
    u = [t]
    visited = [t]

    def step():
        u[0] -= 1
        visited.append(u[0])
        return u[0]

    def jump():
        u[0] = jump_target(u[0], L)
        visited.append(u[0])
        return u[0]

    hops = navigate(t, r, L, step, jump, probe=lambda: jump_target(u[0], L))
    return hops, visited


def bfs_reach(n, L, t):
    seen = {t}
    q = deque([t])
    while q:
        u = q.popleft()
        for v in {u - 1, jump_target(u, L)} if u >= 1 else ():
            if v not in seen:
                seen.add(v)
                q.append(v)
    return seen


def test_trivial_walks():
    assert walk(5, 5, 3)[0] == 0
    for L in (1, 2, 5):
        assert walk(1, 0, L)[0] == 1


def test_n16_exhaustive_with_bfs_oracle():
    n, L = 16, 4
    for t in range(n):
        assert bfs_reach(n, L, t) == set(range(t + 1))
        for r in range(t):
            hops, visited = walk(t, r, L)
            assert visited[-1] == r
            assert hops <= 4 * 4


@pytest.mark.parametrize("n", [64, 256])
def test_bound_monotone_no_overshoot(n):
    L = block_length(n)
    for t in range(n):
        for r in range(t):
            hops, visited = walk(t, r, L)
            assert visited[-1] == r and min(visited) == r
            assert all(a > b for a, b in zip(visited, visited[1:]))
            assert hops <= hop_bound(n)


def test_bad_callbacks_are_detected():
    with pytest.raises(SpannerIntegrityError):
        navigate(8, 0, 4, lambda: 3, lambda: 0)
    with pytest.raises(SpannerIntegrityError):
        navigate(35, 3, 4, lambda: None, lambda: None, probe=lambda: 5)
    with pytest.raises(ParameterError):
        navigate(2, 3, 4, lambda: None, lambda: None)
