from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraclimit.constants import (
    I_qH,
    RegimeTag,
    b_vec_31,
    boundary_coeff,
    bracket,
    explosive_target,
    g,
    h,
    kappa,
    mu,
    nclt_coeff,
    normalization_bundle,
    quadratic_centering,
    regime,
    scaling_matrix_31,
    sigma,
    sigma_matrix_31,
    smoothing_bound,
    weak_variance_closed,
    xi_integral,
    xi_integral_beta,
)
from fraclimit.errors import DivergentIntegral, DomainError, ValidationError
from fraclimit.hermite import expand, hermite_functional, sigma_weak_sq

hurst = st.floats(0.01, 0.99, allow_nan=False)


@pytest.mark.parametrize(("H", "expected"), [(0.5, 2.0), (0.75, 8 / (3 * math.sqrt(math.pi)))])
def test_mu_examples(H: float, expected: float) -> None:
    assert mu(H) == pytest.approx(expected, rel=1e-12)


@given(hurst)
def test_mu_identity(H: float) -> None:
    assert mu(H) * math.gamma(2 * H + 1) == pytest.approx(2.0, abs=1e-12)


def test_check_hurst() -> None:
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValidationError):
            mu(bad)


@pytest.mark.parametrize(
    ("H", "time", "expected"),
    [(0.5, 100.0, 0.1), (0.75, math.e, math.exp(-0.5)), (0.9, 10.0, 10**-0.8)],
)
def test_g_examples(H: float, time: float, expected: float) -> None:
    assert g(H, time) == pytest.approx(expected, rel=1e-12)


def test_g_domain() -> None:
    with pytest.raises(DomainError):
        g(0.5, 1.0)


@pytest.mark.parametrize(("H", "gamma", "expected"), [(0.5, 4.0, 0.125), (0.8, 2.0, 0.25)])
def test_h_examples(H: float, gamma: float, expected: float) -> None:
    assert h(H, gamma) == pytest.approx(expected, rel=1e-12)


@given(hurst)
def test_h_unit_rate(H: float) -> None:
    assert h(H, 1.0) == 1.0


def test_xi_integral_examples() -> None:
    assert xi_integral(0.5) == pytest.approx(math.pi / 4, abs=1e-9)
    assert xi_integral(0.25) == pytest.approx(0.5, abs=1e-9)
    assert xi_integral(0.74) == pytest.approx(xi_integral_beta(0.74), abs=1e-9)


@pytest.mark.parametrize("H", [round(0.05 * k, 2) for k in range(1, 15)])
def test_xi_integral_matches_beta_identity(H: float) -> None:
    assert xi_integral(H) == pytest.approx(xi_integral_beta(H), abs=1e-9)


def test_xi_integral_diverges() -> None:
    with pytest.raises(DivergentIntegral):
        xi_integral(0.75)


@pytest.mark.parametrize(
    ("H", "expected"),
    [(0.75, 0.75), (0.5, 2**-0.5), (0.9, 0.9 * math.sqrt(1.6 / 0.6))],
)
def test_sigma_examples(H: float, expected: float) -> None:
    assert sigma(H) == pytest.approx(expected, rel=1e-9)


def test_sigma_boundary_is_exact() -> None:
    assert sigma(0.75) == 0.75


@pytest.mark.parametrize(
    ("H", "expected"),
    [
        (0.5, 0.5),
        (0.75, math.sqrt(3 / 8) * math.pi**-0.25),
        (0.9, 2**-0.5 * math.sqrt(0.9 / 0.6) / math.sqrt(math.gamma(0.8))),
    ],
)
def test_kappa_examples(H: float, expected: float) -> None:
    assert kappa(H) == pytest.approx(expected, rel=1e-9)


def test_scaling_matrix_examples() -> None:
    np.testing.assert_allclose(np.diag(scaling_matrix_31(0.5, 4.0)), [1, 0.5, 1, 1], rtol=1e-12)
    np.testing.assert_allclose(
        np.diag(scaling_matrix_31(0.75, math.e)),
        [math.exp(-0.25), math.exp(-1), math.exp(0.25), 1],
        rtol=1e-12,
    )
    np.testing.assert_allclose(
        np.diag(scaling_matrix_31(0.8, 10.0)), [10**-0.4, 10**-1.2, 10**0.2, 1], rtol=1e-12
    )


@given(hurst, st.floats(1.01, 1e3))
def test_scaling_matrix_is_positive_diagonal(H: float, gamma: float) -> None:
    D = scaling_matrix_31(H, gamma)
    assert np.all(np.diag(D) > 0)
    assert np.count_nonzero(D - np.diag(np.diag(D))) == 0


def test_scaling_matrix_domain() -> None:
    with pytest.raises(DomainError):
        scaling_matrix_31(0.5, 1.0)


def test_sigma_matrix_and_b() -> None:
    S = sigma_matrix_31(0.5)
    np.testing.assert_allclose(S[:, 0], [-1, -(2**1.5), 0.5, 0], rtol=1e-9, atol=1e-15)
    np.testing.assert_allclose(b_vec_31(0.5, 1.0), [math.sqrt(2), 2, 2**-0.5, 1], rtol=1e-12)
    for H in (0.2, 0.75, 0.9):
        np.testing.assert_array_equal(sigma_matrix_31(H)[:, 1], [0, 0, 0, 0.5])


@pytest.mark.parametrize("u", [0.0, 0.3, 1.0, 5.0, 45.0])
def test_bracket_brownian_case(u: float) -> None:
    assert bracket(0.5, u) == pytest.approx(2 * math.exp(-u), rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_I_qH_brownian(q: int) -> None:
    assert I_qH(q, 0.5) == pytest.approx(2**q / q, abs=1e-8)


@pytest.mark.parametrize("H", [0.1, 0.2, 0.3, 0.4])
def test_I_1H_vanishes(H: float) -> None:
    assert I_qH(1, H) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize(("q", "H"), [(2, 0.3), (2, 0.6), (3, 0.7)])
def test_I_qH_is_positive(q: int, H: float) -> None:
    assert I_qH(q, H) > 0.0


def test_I_qH_domain() -> None:
    with pytest.raises(DomainError):
        I_qH(2, 0.75)
    with pytest.raises(DomainError):
        I_qH(1, 0.6)


@pytest.mark.parametrize("q", [1, 2, 3])
@pytest.mark.parametrize("gamma", [0.5, 2.0])
def test_weak_variance_forms_agree(q: int, gamma: float) -> None:
    e = expand(hermite_functional(q))
    direct = sigma_weak_sq(e, lambda u: math.exp(-gamma * abs(u))).corrected
    assert direct == pytest.approx(weak_variance_closed(q, 0.5, gamma), abs=1e-6)


def test_nclt_and_boundary_coefficients() -> None:
    assert nclt_coeff(1, 0.75, 1.0) == pytest.approx(0.433666, abs=1e-6)
    assert boundary_coeff(2, 0.75, 1.0) == pytest.approx(1.128379, abs=1e-6)
    ratio = nclt_coeff(2, 0.9, 2.0) / nclt_coeff(2, 0.9, 1.0)
    assert ratio == pytest.approx(2 ** (2 * (0.9 - 1)), rel=1e-12)


def test_coefficient_domains() -> None:
    with pytest.raises(DomainError):
        nclt_coeff(2, 0.7, 1.0)
    with pytest.raises(DomainError):
        boundary_coeff(2, 0.7500001, 1.0)
    with pytest.raises(DomainError):
        boundary_coeff(1, 0.5, 1.0)


@pytest.mark.parametrize(
    ("q", "H", "tag"),
    [
        (2, 0.5, RegimeTag.WEAK),
        (2, 0.75, RegimeTag.BOUNDARY),
        (2, 0.9, RegimeTag.STRONG),
        (1, 0.5, RegimeTag.WEAK),
        (1, 0.6, RegimeTag.STRONG),
        (3, 1 - 1 / 6, RegimeTag.BOUNDARY),
    ],
)
def test_regime(q: int, H: float, tag: RegimeTag) -> None:
    assert regime(q, H).tag is tag


def test_explosive_target_and_centering() -> None:
    np.testing.assert_allclose(explosive_target(0.5), [2, 4, 1, 2], rtol=1e-12)
    assert quadratic_centering(0.5, 2.0) == pytest.approx(0.25, rel=1e-12)


def test_smoothing_bound_decays_like_one_over_t() -> None:
    assert smoothing_bound(100.0, 2.0) == pytest.approx(smoothing_bound(10.0, 2.0) / 10, rel=1e-12)


def test_normalization_bundle() -> None:
    bundle = normalization_bundle(2, 0.75, 1.0)
    assert bundle.sigma == 0.75
    assert bundle.regime is RegimeTag.BOUNDARY
    assert bundle.I_qH is None
    assert bundle.D is None  # γ = 1
    assert bundle.boundary_coeff == pytest.approx(1.128379, abs=1e-6)
    assert bundle.g(math.e) == pytest.approx(math.exp(-0.5))
    out = bundle.to_dict()
    assert out["sigma"] == 0.75
    assert out["regime"] == "Boundary"
    assert "I_qH" not in out
    assert isinstance(out["Sigma_mat"], list)


def test_normalization_bundle_weak_with_gamma() -> None:
    bundle = normalization_bundle(2, 0.5, 4.0)
    assert bundle.mu * math.gamma(2) == pytest.approx(2.0)
    assert bundle.I_qH == pytest.approx(2.0, abs=1e-8)
    assert bundle.D is not None
    assert bundle.weak_variance == pytest.approx(weak_variance_closed(2, 0.5, 4.0))
