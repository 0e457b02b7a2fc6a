#   Copyright 2020-present Michael Hall
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.

"""Bounded memoization for the expensive deterministic scalar functions.

Quadratures (FOUP covariance, the xi integral, I_{q,H}, the slowly varying
norming L) are pure in their arguments and get re-evaluated with the same
arguments by nested quadratures and by every rung of a scaling ladder.
"""

from __future__ import annotations

import threading
from collections.abc import Callable, Hashable
from functools import wraps

from . import _typings as t
from ._paramkey import make_key
from .errors import ValidationError

__all__ = ("LRU", "CacheStats", "memoize")


class LRU[K, V]:
    """A bounded mapping that evicts the least recently used entry.

    Reads and writes both count as use. Not synchronized; ``memoize`` holds
    a lock around it.

    Parameters
    ----------
    maxsize: int
        The maximum number of entries to retain, at least 1.
    """

    __slots__ = ("_entries", "_maxsize", "evicted")

    def __init__(self, maxsize: int, /) -> None:
        if maxsize < 1:
            msg = f"maxsize must be at least 1, got {maxsize}"
            raise ValidationError(msg)
        self._entries: dict[K, V] = {}
        self._maxsize = maxsize
        self.evicted = 0

    def get[T](self, key: K, default: T, /) -> V | T:
        """Return the entry for ``key``, or ``default`` without inserting it."""
        if key not in self._entries:
            return default
        return self[key]

    def __getitem__(self, key: K, /) -> V:
        # dicts keep insertion order; re-inserting moves the key to the back
        value = self._entries[key] = self._entries.pop(key)
        return value

    def __setitem__(self, key: K, value: V, /) -> None:
        self._entries.pop(key, None)
        self._entries[key] = value
        if len(self._entries) > self._maxsize:
            del self._entries[next(iter(self._entries))]
            self.evicted += 1

    def __contains__(self, key: object, /) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def clear(self) -> None:
        self._entries.clear()


class CacheStats:
    __slots__ = ("hits", "misses")

    def __init__(self, hits: int = 0, misses: int = 0) -> None:
        self.hits = hits
        self.misses = misses

    def __repr__(self) -> str:
        return f"CacheStats(hits={self.hits}, misses={self.misses})"


type _CT_RET = tuple[tuple[t.Any, ...], dict[str, t.Any]]
type CacheTransformer = Callable[[tuple[t.Any, ...], dict[str, t.Any]], _CT_RET]

_MISSING: t.Any = object()


def memoize[**P, R](
    maxsize: int = 4096,
    *,
    cache_transform: CacheTransformer | None = None,
) -> Callable[[Callable[P, R]], Callable[P, R]]:
    """Cache the results of a pure function in a bounded LRU.

    Keys are built from the call arguments by ``_paramkey.make_key``. A
    value passed by keyword and the same value passed positionally are
    different keys; keyword order is not significant.

    Exceptions are not cached.

    Unlike the LRU itself, the wrapper is safe to share across the replicate
    worker threads: lookups and insertions are serialized, the wrapped
    computation is not.

    Parameters
    ----------
    maxsize: int
        The maximum number of results to retain.
        Results evicted by this policy are evicted by least recent use.
    cache_transform: CacheTransformer | None
        An optional callable that transforms args and kwargs used
        as a cache key.

    Returns
    -------
    A decorator which wraps functions with LRU caching. The wrapper exposes
    ``stats`` (hit/miss counters) and ``cache_clear``.
    """
    if cache_transform is None:
        key_func = make_key
    else:

        def key_func(args: tuple[t.Any, ...], kwds: dict[t.Any, t.Any]) -> Hashable:
            return make_key(*cache_transform(args, kwds))

    def wrapper(func: Callable[P, R]) -> Callable[P, R]:
        internal_cache: LRU[Hashable, R] = LRU(maxsize)
        lock = threading.Lock()
        stats = CacheStats()

        @wraps(func)
        def wrapped(*args: P.args, **kwargs: P.kwargs) -> R:
            key = key_func(args, kwargs)
            with lock:
                cached = internal_cache.get(key, _MISSING)
                if cached is not _MISSING:
                    stats.hits += 1
                    return cached
                stats.misses += 1

            result = func(*args, **kwargs)
            with lock:
                internal_cache[key] = result
            return result

        def cache_clear() -> None:
            with lock:
                internal_cache.clear()
                stats.hits = stats.misses = 0

        wrapped.stats = stats  # pyright: ignore[reportFunctionMemberAccess]
        wrapped.cache_clear = cache_clear  # pyright: ignore[reportFunctionMemberAccess]
        return wrapped

    return wrapper
