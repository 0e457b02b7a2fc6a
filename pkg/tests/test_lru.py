from __future__ import annotations

import numpy as np
import pytest

from fraclimit.errors import ValidationError
from fraclimit.lru import LRU, memoize
from fraclimit.workers import threaded_pool


def test_lru_evicts_least_recent() -> None:
    cache: LRU[str, int] = LRU(2)
    cache["a"] = 1
    cache["b"] = 2
    assert cache["a"] == 1  # refresh a
    cache["c"] = 3
    assert cache.get("b", None) is None
    assert cache.get("a", None) == 1
    assert len(cache) == 2
    cache.clear()
    assert len(cache) == 0


def test_memoize_counts_and_clears() -> None:
    calls: list[float] = []

    @memoize(maxsize=8)
    def square(x: float) -> float:
        calls.append(x)
        return x * x

    assert square(3.0) == 9.0
    assert square(3.0) == 9.0
    assert calls == [3.0]
    stats = square.stats  # pyright: ignore[reportFunctionMemberAccess]
    assert (stats.hits, stats.misses) == (1, 1)
    square.cache_clear()  # pyright: ignore[reportFunctionMemberAccess]
    square(3.0)
    assert calls == [3.0, 3.0]


def test_memoize_shares_numpy_and_python_scalars() -> None:
    calls: list[float] = []

    @memoize()
    def f(H: float, n: int) -> float:
        calls.append(H)
        return H * n

    f(0.75, 4)
    f(np.float64(0.75), np.int64(4))  # pyright: ignore[reportArgumentType]
    assert len(calls) == 1


def test_memoize_does_not_cache_exceptions() -> None:
    attempts: list[int] = []

    @memoize()
    def flaky(x: int) -> int:
        attempts.append(x)
        if len(attempts) == 1:
            raise RuntimeError
        return x

    try:
        flaky(1)
    except RuntimeError:
        pass
    assert flaky(1) == 1
    assert attempts == [1, 1]


def test_memoize_ignores_keyword_order() -> None:
    calls: list[float] = []

    @memoize()
    def f(H: float, *, gamma: float, t: float) -> float:
        calls.append(H)
        return H * gamma * t

    f(0.6, gamma=1.0, t=2.0)
    f(0.6, t=2.0, gamma=np.float64(1.0))  # pyright: ignore[reportArgumentType]
    assert len(calls) == 1


def test_lru_write_refreshes_and_counts_evictions() -> None:
    cache: LRU[str, int] = LRU(2)
    cache["a"] = 1
    cache["b"] = 2
    cache["a"] = 10
    cache["c"] = 3
    assert "b" not in cache
    assert cache["a"] == 10
    assert cache.evicted == 1
    assert cache.get("zzz", None) is None
    assert len(cache) == 2


def test_lru_needs_room() -> None:
    with pytest.raises(ValidationError):
        LRU(0)


def test_memoize_counts_every_concurrent_call() -> None:
    @memoize(maxsize=16)
    def f(x: int) -> int:
        return x * x

    def hammer() -> None:
        for i in range(2000):
            f(i % 8)

    with threaded_pool(max_workers=8) as pool:
        futures = [pool.schedule(hammer) for _ in range(8)]
    for fut in futures:
        fut.result()
    stats = f.stats  # pyright: ignore[reportFunctionMemberAccess]
    assert stats.hits + stats.misses == 8 * 2000
    assert stats.misses >= 8
