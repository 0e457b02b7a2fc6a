from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraclimit.errors import (
    DivergentIntegral,
    MeanNotZero,
    QuadratureFailed,
    RankUndetected,
    ValidationError,
)
from fraclimit.hermite import (
    Functional,
    HermiteExpansion,
    expand,
    gauss_hermite,
    hermite_eval,
    hermite_functional,
    hermite_rank,
    sigma_weak_sq,
)

EXPLICIT = {
    0: lambda x: 1.0,
    1: lambda x: x,
    2: lambda x: x**2 - 1,
    3: lambda x: x**3 - 3 * x,
    4: lambda x: x**4 - 6 * x**2 + 3,
    5: lambda x: x**5 - 10 * x**3 + 15 * x,
    6: lambda x: x**6 - 15 * x**4 + 45 * x**2 - 15,
}


@pytest.mark.parametrize(("k", "x", "expected"), [(0, 7.3, 1.0), (2, 0.0, -1.0), (3, 2.0, 2.0)])
def test_hermite_eval_examples(k: int, x: float, expected: float) -> None:
    assert hermite_eval(k, x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("k", range(7))
@pytest.mark.parametrize("x", [-3.0, 0.0, 1.0, 2.5])
def test_recurrence_matches_explicit_polynomials(k: int, x: float) -> None:
    assert hermite_eval(k, x) == pytest.approx(EXPLICIT[k](x), abs=1e-12)


def test_hermite_eval_vectorized_and_scalar() -> None:
    x = np.array([-1.0, 0.5, 2.0])
    out = hermite_eval(3, x)
    assert isinstance(out, np.ndarray)
    np.testing.assert_allclose(out, x**3 - 3 * x)
    assert isinstance(hermite_eval(3, 0.5), float)


def test_hermite_eval_rejects_negative_degree() -> None:
    with pytest.raises(ValidationError):
        hermite_eval(-1, 0.0)


def test_orthogonality_under_quadrature() -> None:
    nodes, weights = gauss_hermite()
    for j in range(7):
        for k in range(7):
            value = math.fsum(weights * hermite_eval(j, nodes) * hermite_eval(k, nodes))
            assert value == pytest.approx(math.factorial(k) if j == k else 0.0, abs=1e-10)


def test_gauss_hermite_is_read_only() -> None:
    nodes, _ = gauss_hermite()
    with pytest.raises(ValueError, match="read-only"):
        nodes[0] = 0.0


def test_expand_h2() -> None:
    e = expand(hermite_functional(2))
    assert e.coeff(2) == pytest.approx(2.0, abs=1e-10)
    for k in range(1, e.truncation + 1):
        if k != 2:
            assert abs(e.coeff(k)) < 1e-9
    assert e.rank == 2


def test_expand_identity_has_rank_one() -> None:
    e = expand(lambda x: x)
    assert e.coeff(1) == pytest.approx(1.0, abs=1e-12)
    assert hermite_rank(e) == 1


def test_expand_rejects_uncentered() -> None:
    with pytest.raises(MeanNotZero):
        expand(lambda x: x**2)


def test_expand_validates_arguments() -> None:
    with pytest.raises(ValidationError):
        expand(lambda x: x, K=0)
    with pytest.raises(ValidationError):
        expand(lambda x: x, K=20, quad_order=10)


def test_expand_zero_functional_has_no_rank() -> None:
    with pytest.raises(RankUndetected):
        expand(lambda x: 0.0 * x)


@pytest.mark.parametrize(("fn", "rank"), [(lambda x: x**3 - 3 * x, 3), (lambda x: x**2 - 1, 2)])
def test_hermite_rank_examples(fn: object, rank: int) -> None:
    assert hermite_rank(expand(fn)) == rank  # pyright: ignore[reportArgumentType]


def test_hermite_rank_of_zero_expansion() -> None:
    e = HermiteExpansion.from_coeffs([0.0, 0.0, 0.0])
    assert e.rank is None
    with pytest.raises(RankUndetected):
        hermite_rank(e)


@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=6))
def test_parseval_for_polynomials(coeffs: list[float]) -> None:
    # Σ a_k H_k has c_k = a_k k!, so it is mean zero by construction
    def f(x: np.ndarray) -> np.ndarray:
        return sum(a * hermite_eval(k, x) for k, a in enumerate(coeffs, start=1))

    functional = Functional.of(f)
    if functional.second_moment < 1e-6:
        return
    e = expand(functional)
    assert e.parseval == pytest.approx(functional.second_moment, rel=1e-8, abs=1e-8)
    assert e.tail == pytest.approx(0.0, abs=1e-8 * max(1.0, functional.second_moment))


def test_expansion_evaluates_like_source() -> None:
    e = expand(lambda x: x**3 - 3 * x + 2 * x)
    x = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(e(x), x**3 - x, atol=1e-9)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 3.0])
def test_sigma_weak_sq_rank_one_exponential(gamma: float) -> None:
    e = expand(hermite_functional(1))
    res = sigma_weak_sq(e, lambda u: math.exp(-gamma * abs(u)))
    assert res.corrected == pytest.approx(2 / gamma, rel=1e-8)


def test_sigma_weak_sq_h2() -> None:
    e = expand(hermite_functional(2))
    assert sigma_weak_sq(e, lambda u: math.exp(-abs(u))).corrected == pytest.approx(2.0, rel=1e-8)


def test_sigma_weak_sq_unconverged_integral_raises() -> None:
    e = expand(hermite_functional(1))

    def r(u: float) -> float:
        return math.exp(-u) * (1 + 0.5 * math.cos(40 * u * u)) / 1.5

    with pytest.raises(QuadratureFailed, match=r"r\^1"):
        sigma_weak_sq(e, r, 20.0, quad_limit=3)


def test_sigma_weak_sq_zero_expansion() -> None:
    e = HermiteExpansion.from_coeffs([0.0, 0.0])
    assert sigma_weak_sq(e, lambda u: math.exp(-abs(u))) == (0.0, 0.0)


def test_sigma_weak_sq_ignores_subtolerance_coefficients() -> None:
    base = HermiteExpansion.from_coeffs([0.0, 2.0], second_moment=2.0)
    noisy = HermiteExpansion.from_coeffs([1e-14, 2.0, 1e-13], second_moment=2.0)
    r = lambda u: math.exp(-abs(u))  # noqa: E731
    assert sigma_weak_sq(noisy, r) == sigma_weak_sq(base, r)


def test_sigma_weak_sq_reports_tail() -> None:
    e = expand(hermite_functional(2))
    res = sigma_weak_sq(e, lambda u: (1 + abs(u)) ** -1.5)
    # ∫_ℝ (1+|u|)^{-3} du = 1, so σ² = 2
    assert res.tail > 0.0
    assert res.corrected == pytest.approx(2.0, rel=1e-3)


def test_sigma_weak_sq_divergent() -> None:
    e = expand(hermite_functional(1))
    with pytest.raises(DivergentIntegral):
        sigma_weak_sq(e, lambda u: (1 + abs(u)) ** -0.5)
