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

"""Replicate-parallel execution and seed derivation.

Replicate ``i`` of a run with root seed ``s`` always draws from
``default_rng(SeedSequence(s, spawn_key=(i,)))``. Work is cut into fixed
chunks of consecutive replicates and results are reassembled in replicate
order, so the output of a run does not depend on the worker count or on
which thread finished first.
"""

from __future__ import annotations

import concurrent.futures as cf
import logging
import os
from collections.abc import Callable, Generator, Sequence
from contextlib import contextmanager

import numpy as np

from . import _typings as t
from .errors import ValidationError

__all__ = (
    "DEFAULT_CHUNK",
    "PoolWrapper",
    "map_replicates",
    "replicate_rng",
    "replicate_rngs",
    "run_chunked",
    "threaded_pool",
    "worker_count",
)

log = logging.getLogger(__name__)

DEFAULT_CHUNK = 32
THREADS_ENV = "FRACLIMIT_THREADS"


def worker_count() -> int:
    """Number of replicate workers.

    ``FRACLIMIT_THREADS`` caps it; the default is ``min(8, cpu_count)``.
    Invalid values are ignored with a warning rather than failing a run.
    """
    default = min(8, os.cpu_count() or 1)
    raw = os.getenv(THREADS_ENV, "")
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        log.warning("Ignoring non-integer %s=%r", THREADS_ENV, raw)
        return default
    return max(1, min(value, default))


def replicate_rng(
    root_seed: int, index: int, /, *, stream: int | None = None
) -> np.random.Generator:
    """Generator for one replicate, derived by counter from the root seed.

    ``stream`` separates independent families drawn under one root seed,
    e.g. the rungs of a scaling ladder.
    """
    key = (index,) if stream is None else (stream, index)
    return np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=key))


def replicate_rngs(
    root_seed: int, start: int, stop: int, /, *, stream: int | None = None
) -> list[np.random.Generator]:
    """Generators for replicates ``start..stop-1``."""
    return [replicate_rng(root_seed, i, stream=stream) for i in range(start, stop)]


class PoolWrapper:
    def __init__(self, executor: cf.ThreadPoolExecutor) -> None:
        self._executor = executor
        self._futures: set[cf.Future[t.Any]] = set()

    def schedule[**P, T](
        self, fn: Callable[P, T], /, *args: P.args, **kwargs: P.kwargs
    ) -> cf.Future[T]:
        """Schedule a callable to run on the wrapped pool.

        Parameters
        ----------
        fn:
            A thread-safe callable

        Returns
        -------
        concurrent.futures.Future:
            A Future wrapping the result.
        """
        future = self._executor.submit(fn, *args, **kwargs)
        self._futures.add(future)
        future.add_done_callback(self._futures.discard)
        return future

    def cancel_all(self) -> None:
        """Cancel all remaining futures that have not started."""
        for future in list(self._futures):
            future.cancel()

    def wait_sync(self, timeout: float | None) -> bool:
        """Wait for remaining futures.

        Parameters
        ----------
        timeout: float | None
            Optionally, how long to wait for

        Returns
        -------
        bool
            True if all futures finished, otherwise False
        """
        _done, pending = cf.wait(list(self._futures), timeout=timeout)
        return not pending


@contextmanager
def threaded_pool(
    *, max_workers: int | None = None, wait_on_exit: bool = True
) -> Generator[PoolWrapper, None, None]:
    """Create and use a managed pool of background worker threads.

    At context manager exit, if wait_on_exit is True (default), then
    the context manager waits on the remaining futures. When it is done, or
    if that parameter is False, pending work is cancelled and the pool is
    shut down.

    Yields
    ------
    PoolWrapper
        A wrapper with methods for scheduling work on the pool.
    """
    executor = cf.ThreadPoolExecutor(
        max_workers=max_workers or worker_count(), thread_name_prefix="fraclimit"
    )
    wrapper = None
    try:
        wrapper = PoolWrapper(executor)
        yield wrapper
    finally:
        if wrapper:
            if wait_on_exit:
                wrapper.wait_sync(None)
            else:
                wrapper.cancel_all()
        executor.shutdown(wait=True, cancel_futures=not wait_on_exit)


def run_chunked[T](
    fn: Callable[[int, int], T],
    reps: int,
    /,
    *,
    chunk: int = DEFAULT_CHUNK,
    max_workers: int | None = None,
) -> list[T]:
    """Run ``fn(start, stop)`` over consecutive replicate chunks.

    Returns
    -------
    list
        One result per chunk, in chunk order.
    """
    bounds: Sequence[tuple[int, int]] = [
        (start, min(start + chunk, reps)) for start in range(0, reps, chunk)
    ]
    workers = max_workers or worker_count()
    if workers == 1 or len(bounds) == 1:
        return [fn(start, stop) for start, stop in bounds]

    log.debug("Running %d replicates in %d chunks on %d threads", reps, len(bounds), workers)
    with threaded_pool(max_workers=workers) as pool:
        futures = [pool.schedule(fn, start, stop) for start, stop in bounds]
        try:
            return [f.result() for f in futures]
        except BaseException:
            pool.cancel_all()
            raise


def map_replicates(
    fn: Callable[[Sequence[np.random.Generator]], t.FloatArray],
    reps: int,
    seed: int,
    /,
    *,
    stream: int | None = None,
    chunk: int = DEFAULT_CHUNK,
    max_workers: int | None = None,
) -> t.FloatArray:
    """Apply ``fn`` to chunks of replicate generators and stack the rows.

    ``fn`` gets the generators of one chunk and returns one row (or one
    value) per generator. Row ``i`` of the result always comes from
    replicate ``i``'s generator.
    """

    def run(start: int, stop: int) -> t.FloatArray:
        return np.asarray(fn(replicate_rngs(seed, start, stop, stream=stream)))

    if reps < 1:
        msg = f"Need at least one replicate, got {reps}"
        raise ValidationError(msg)
    return np.concatenate(run_chunked(run, reps, chunk=chunk, max_workers=max_workers))
