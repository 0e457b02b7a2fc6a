from __future__ import annotations

import numpy as np
import pytest

from fraclimit.errors import ValidationError
from fraclimit.workers import (
    THREADS_ENV,
    map_replicates,
    replicate_rng,
    run_chunked,
    threaded_pool,
    worker_count,
)


def _draw(gens: list[np.random.Generator]) -> np.ndarray:
    return np.array([g.standard_normal() for g in gens])


def test_replicate_rng_is_counter_based() -> None:
    a = replicate_rng(7, 3).standard_normal(4)
    b = replicate_rng(7, 3).standard_normal(4)
    c = replicate_rng(7, 4).standard_normal(4)
    d = replicate_rng(7, 3, stream=1).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


@pytest.mark.parametrize("chunk", [1, 5, 32, 1000])
def test_map_replicates_independent_of_chunking(chunk: int) -> None:
    ref = np.array([replicate_rng(11, i).standard_normal() for i in range(37)])
    np.testing.assert_array_equal(map_replicates(_draw, 37, 11, chunk=chunk), ref)


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_map_replicates_independent_of_workers(workers: int) -> None:
    a = map_replicates(_draw, 50, 3, chunk=4, max_workers=workers)
    b = map_replicates(_draw, 50, 3, chunk=4, max_workers=1)
    np.testing.assert_array_equal(a, b)


def test_map_replicates_rejects_empty_runs() -> None:
    with pytest.raises(ValidationError):
        map_replicates(_draw, 0, 1)


def test_run_chunked_propagates_errors() -> None:
    def boom(start: int, stop: int) -> int:
        if start >= 4:
            raise RuntimeError(start)
        return stop - start

    with pytest.raises(RuntimeError):
        run_chunked(boom, 10, chunk=2, max_workers=2)


def test_threaded_pool_schedules() -> None:
    with threaded_pool(max_workers=2) as pool:
        futs = [pool.schedule(pow, i, 2) for i in range(5)]
    assert [f.result() for f in futs] == [0, 1, 4, 9, 16]


def test_worker_count_env(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv(THREADS_ENV, "1")
    assert worker_count() == 1
    monkeypatch.setenv(THREADS_ENV, "not-a-number")
    assert worker_count() >= 1
