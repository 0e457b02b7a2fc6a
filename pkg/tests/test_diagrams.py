from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraclimit.diagrams import (
    CorrelationMatrix,
    diagram_moment,
    enumerate_diagrams,
    mc_moment_oracle,
)
from fraclimit.errors import NotPSD, TooLarge, ValidationError


def _random_corr(p: int, seed: int) -> CorrelationMatrix:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((p, p + 2))
    cov = a @ a.T
    d = np.sqrt(np.diag(cov))
    corr = cov / np.outer(d, d)
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix.of((corr + corr.T) / 2)


@pytest.mark.parametrize(
    ("p", "q", "count"),
    [(2, 1, 1), (2, 2, 2), (2, 3, 6), (2, 4, 24), (2, 5, 120), (4, 1, 3), (3, 2, 8), (3, 1, 0)],
)
def test_diagram_counts(p: int, q: int, count: int) -> None:
    assert len(enumerate_diagrams(p, q)) == count


def test_diagram_structure() -> None:
    for d in enumerate_diagrams(3, 2):
        assert len(d.edges) == 3
        assert len(d.vertices) == 6
        for e in d.edges:
            assert e.m < e.M


def test_enumeration_is_deterministic() -> None:
    assert enumerate_diagrams(4, 2) == enumerate_diagrams(4, 2)


def test_enumeration_limits() -> None:
    with pytest.raises(TooLarge):
        enumerate_diagrams(3, 6)
    with pytest.raises(ValidationError):
        enumerate_diagrams(1, 2)


@pytest.mark.parametrize(
    ("p", "q", "rho", "expected"), [(2, 1, 0.3, 0.3), (2, 2, 0.5, 0.5), (3, 2, 1.0, 8.0)]
)
def test_diagram_moment_examples(p: int, q: int, rho: float, expected: float) -> None:
    assert diagram_moment(p, q, CorrelationMatrix.equicorrelated(p, rho)) == pytest.approx(
        expected, abs=1e-12
    )


@pytest.mark.parametrize("q", range(1, 6))
@pytest.mark.parametrize("rho", [Fraction(0), Fraction(1, 2), Fraction(-1, 2), Fraction(1), Fraction(-1)])
def test_two_level_moment_is_exact(q: int, rho: Fraction) -> None:
    expected = math.factorial(q) * rho**q
    value = diagram_moment(2, q, [[1.0, float(rho)], [float(rho), 1.0]])
    assert value == pytest.approx(float(expected), abs=1e-12)


@pytest.mark.parametrize(("p", "q"), [(2, 2), (3, 2), (4, 1), (4, 2), (2, 4)])
def test_moment_matches_enumeration(p: int, q: int) -> None:
    corr = _random_corr(p, 11 * p + q)
    explicit = math.fsum(d.weight(corr) for d in enumerate_diagrams(p, q))
    assert diagram_moment(p, q, corr) == pytest.approx(explicit, rel=1e-12, abs=1e-12)


@given(st.permutations(range(4)), st.integers(0, 2**32 - 1))
def test_permutation_equivariance(order: list[int], seed: int) -> None:
    corr = _random_corr(4, seed)
    assert diagram_moment(4, 2, corr.permuted(order)) == pytest.approx(
        diagram_moment(4, 2, corr), rel=1e-10, abs=1e-12
    )


def test_correlation_matrix_validation() -> None:
    with pytest.raises(ValidationError):
        CorrelationMatrix.of([[1.0, 0.2], [0.3, 1.0]])
    with pytest.raises(ValidationError):
        CorrelationMatrix.of([[2.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValidationError):
        CorrelationMatrix.of([1.0, 0.0])
    with pytest.raises(NotPSD):
        CorrelationMatrix.equicorrelated(3, -0.9)


def test_moment_size_mismatch() -> None:
    with pytest.raises(ValidationError):
        diagram_moment(3, 2, CorrelationMatrix.equicorrelated(2, 0.1))


def test_oracle_examples() -> None:
    est = mc_moment_oracle(2, 2, CorrelationMatrix.equicorrelated(2, 0.5), 100_000, seed=1)
    assert abs(est.estimate - 0.5) < 4 * est.stderr
    est = mc_moment_oracle(2, 1, CorrelationMatrix.equicorrelated(2, 0.0), 100_000, seed=2)
    assert abs(est.estimate) < 4 * est.stderr


@pytest.mark.parametrize(("p", "q"), [(3, 1), (3, 3), (5, 1)])
def test_odd_vertex_count_moment_is_zero(p: int, q: int) -> None:
    corr = _random_corr(p, 7 * p + q)
    assert diagram_moment(p, q, corr) == 0.0
    est = mc_moment_oracle(p, q, corr, 100_000, seed=p * q)
    assert abs(est.estimate) < 4 * est.stderr


def test_oracle_rejects_small_samples_and_bad_matrices() -> None:
    with pytest.raises(ValidationError):
        mc_moment_oracle(2, 1, CorrelationMatrix.equicorrelated(2, 0.0), 10)
    with pytest.raises(NotPSD):
        mc_moment_oracle(3, 1, [[1, 0.9, -0.9], [0.9, 1, 0.9], [-0.9, 0.9, 1]])


@pytest.mark.slow
@pytest.mark.parametrize(
    ("p", "q"),
    [(p, q) for p in range(2, 7) for q in range(1, 7) if p * q <= 12],
)
def test_oracle_equivalence(p: int, q: int) -> None:
    for seed in range(5):
        corr = _random_corr(p, 1000 * p + 10 * q + seed)
        est = mc_moment_oracle(p, q, corr, 100_000, seed=seed)
        assert abs(est.estimate - diagram_moment(p, q, corr)) < 4 * est.stderr
