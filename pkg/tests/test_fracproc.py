from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fraclimit.errors import (
    BurnInTooShort,
    DivergentIntegral,
    DomainError,
    Overflow,
    ValidationError,
)
from fraclimit.fracproc import (
    FoupSpec,
    GaussPath,
    PathKind,
    TimeGrid,
    brownian_sample,
    fbm_batch,
    fbm_cov,
    fbm_sample,
    fgn_autocov,
    foup_cov,
    foup_cov_closed,
    foup_cov_leading,
    foup_cov_sq_integral,
    foup_from_fbm,
    foup_mantissa,
    foup_stationary_batch,
    foup_stationary_sample,
    foup_transform,
    spectral_density,
)

hurst = st.floats(0.05, 0.95)


def test_time_grid() -> None:
    grid = TimeGrid(2.0, 4)
    assert grid.dt == 0.5
    np.testing.assert_array_equal(grid.times, [0.0, 0.5, 1.0, 1.5, 2.0])
    assert TimeGrid.from_step(1.0, 0.1).n == 10


@pytest.mark.parametrize(
    "make", [lambda: TimeGrid(0.0, 3), lambda: TimeGrid(1.0, 0), lambda: TimeGrid.from_step(1.0, 0.3)]
)
def test_time_grid_validation(make: object) -> None:
    with pytest.raises(ValidationError):
        make()  # pyright: ignore[reportCallIssue]


def test_gauss_path_shape_and_read_only() -> None:
    with pytest.raises(ValidationError):
        GaussPath(TimeGrid(1.0, 4), np.zeros(4), PathKind.FBM)
    path = fbm_sample(0.7, TimeGrid(1.0, 8), 3)
    with pytest.raises(ValueError, match="read-only"):
        path.values[1] = 0.0


@pytest.mark.parametrize(
    ("H", "s", "t", "expected"), [(0.5, 1.0, 3.0, 1.0), (0.75, 2.0, 2.0, 2**1.5), (0.3, 0.0, 5.0, 0.0)]
)
def test_fbm_cov_examples(H: float, s: float, t: float, expected: float) -> None:
    assert fbm_cov(H, s, t) == pytest.approx(expected, rel=1e-12, abs=1e-15)


@given(hurst, st.floats(0.0, 10.0), st.floats(0.0, 10.0), st.floats(0.01, 100.0))
def test_fbm_cov_self_similarity(H: float, s: float, t: float, c: float) -> None:
    scaled = fbm_cov(H, c * s, c * t)
    assert scaled == pytest.approx(c ** (2 * H) * fbm_cov(H, s, t), rel=1e-9, abs=1e-12)


@given(hurst, st.integers(2, 64))
def test_fbm_cov_matrix_is_psd(H: float, n: int) -> None:
    times = np.linspace(0.1, 3.0, n)
    cov = fbm_cov(H, times[:, None], times[None, :])
    assert np.linalg.eigvalsh(cov).min() >= -1e-8


def test_fgn_autocov() -> None:
    np.testing.assert_allclose(fgn_autocov(0.5, 4), [1, 0, 0, 0, 0], atol=1e-15)
    acov = fgn_autocov(0.8, 10)
    assert acov[0] == 1.0
    assert np.all(acov[1:] > 0)


def test_fbm_sample_starts_at_zero_and_is_deterministic() -> None:
    grid = TimeGrid(5.0, 100)
    a = fbm_sample(0.3, grid, 42)
    b = fbm_sample(0.3, grid, 42)
    assert a.values[0] == 0.0
    assert a.kind is PathKind.FBM
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, fbm_sample(0.3, grid, 43).values)


def test_batch_rows_match_single_samples() -> None:
    grid = TimeGrid(1.0, 50)
    batch = fbm_batch(0.65, grid, [7, 8, 9])
    assert batch.shape == (3, 51)
    np.testing.assert_allclose(batch[1], fbm_sample(0.65, grid, 8).values, rtol=1e-12, atol=1e-15)
    assert fbm_batch(0.65, grid, []).shape == (0, 51)


def test_brownian_increments_are_uncorrelated() -> None:
    n, reps = 64, 10_000
    paths = fbm_batch(0.5, TimeGrid(float(n), n), list(range(reps)))
    incr = np.diff(paths, axis=-1)
    lag1 = np.mean(incr[:, 1:] * incr[:, :-1]) / np.mean(incr**2)
    assert abs(lag1) < 4 / math.sqrt(n * reps)


def test_brownian_sample() -> None:
    path = brownian_sample(TimeGrid(1.0, 10), 0)
    assert path.kind is PathKind.BROWNIAN
    assert path.hurst == 0.5
    assert path.values[0] == 0.0


@pytest.mark.slow
@pytest.mark.parametrize("H", [0.3, 0.5, 0.75, 0.9])
def test_fbm_covariance_matches_target(H: float) -> None:
    grid = TimeGrid(1.0, 64)
    paths = fbm_batch(H, grid, list(range(10_000)))
    times = grid.times
    for i, j in [(1, 1), (8, 16), (16, 64), (32, 33), (64, 64), (5, 60)]:
        prod = paths[:, i] * paths[:, j]
        se = prod.std(ddof=1) / math.sqrt(prod.size)
        assert abs(prod.mean() - fbm_cov(H, times[i], times[j])) < 4 * se


def test_foup_gamma_zero_is_identity() -> None:
    path = fbm_sample(0.6, TimeGrid(1.0, 32), 1)
    np.testing.assert_array_equal(foup_from_fbm(0.0, path).values, path.values)


@pytest.mark.parametrize("gamma", [2.0, 0.5, -1.0])
def test_foup_of_ramp(gamma: float) -> None:
    grid = TimeGrid(2.0, 2000)
    out = foup_transform(gamma, grid.times, grid.dt)
    expected = -np.expm1(-gamma * grid.times) / gamma
    np.testing.assert_allclose(out, expected, rtol=1e-5, atol=1e-8)


@given(st.floats(-3.0, 3.0), st.integers(0, 2**32 - 1))
def test_foup_transform_is_linear(gamma: float, seed: int) -> None:
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 41))
    a, b = rng.standard_normal(2)
    lhs = foup_transform(gamma, a * x + b * y, 0.05)
    rhs = a * foup_transform(gamma, x, 0.05) + b * foup_transform(gamma, y, 0.05)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_foup_from_fbm_rejects_foup_input() -> None:
    path = foup_from_fbm(1.0, fbm_sample(0.6, TimeGrid(1.0, 16), 0))
    assert path.kind is PathKind.FOUP
    assert path.gamma == 1.0
    with pytest.raises(ValidationError):
        foup_from_fbm(1.0, path)


def test_explosive_overflow_and_mantissa() -> None:
    grid = TimeGrid(800.0, 800)
    values = np.zeros(grid.n + 1)
    with pytest.raises(Overflow):
        foup_transform(-1.0, values, grid.dt)
    np.testing.assert_array_equal(foup_mantissa(-1.0, values, grid.dt), values)
    with pytest.raises(DomainError):
        foup_mantissa(0.0, values, grid.dt)


@pytest.mark.slow
def test_ou_variance() -> None:
    gamma, grid = 1.5, TimeGrid(2.0, 400)
    paths = foup_transform(gamma, fbm_batch(0.5, grid, list(range(10_000))), grid.dt)
    end = paths[:, -1]
    expected = -np.expm1(-2 * gamma * grid.horizon) / (2 * gamma)
    se = expected * math.sqrt(2 / end.size)
    assert abs(end.var() - expected) < 4 * se


def test_stationary_sample_shape_and_kind() -> None:
    spec = FoupSpec(0.7, 2.0)
    assert spec.effective_burn_in == 5.0
    path = foup_stationary_sample(spec, TimeGrid(1.0, 20), 5)
    assert path.kind is PathKind.STATIONARY_FOUP
    assert path.values.shape == (21,)


def test_burn_in_too_short_warns() -> None:
    with pytest.warns(BurnInTooShort):
        foup_stationary_batch(FoupSpec(0.5, 1.0, burn_in=0.0), TimeGrid(1.0, 10), [0])


def test_stationary_needs_positive_gamma() -> None:
    with pytest.raises(ValidationError):
        foup_stationary_batch(FoupSpec(0.5, -1.0), TimeGrid(1.0, 10), [0])
    with pytest.raises(ValidationError):
        FoupSpec(0.5, 1.0, burn_in=-1.0)


@pytest.mark.slow
@pytest.mark.parametrize("H", [0.5, 0.7])
def test_stationary_moments(H: float) -> None:
    gamma, lag = 1.0, 1.0
    grid = TimeGrid(4.0, 200)
    paths = foup_stationary_batch(FoupSpec(H, gamma), grid, list(range(10_000)))
    reps = paths.shape[0]
    assert abs(paths[:, 0].var() - 1.0) < 4 * math.sqrt(2 / reps)
    k = round(lag / grid.dt)
    target = foup_cov(H, gamma, lag)
    for start in (0, 50, 100):
        prod = paths[:, start] * paths[:, start + k]
        se = prod.std(ddof=1) / math.sqrt(reps)
        assert abs(prod.mean() - target) < 4 * se


@pytest.mark.parametrize("H", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("gamma", [0.5, 3.0])
def test_spectral_density_integrates_to_one(H: float, gamma: float) -> None:
    def f(x: float) -> float:
        return spectral_density(H, gamma, x)

    near, _ = integrate.quad(f, 0.0, 1.0, limit=200)
    far, _ = integrate.quad(f, 1.0, math.inf, limit=200)
    assert 2 * (near + far) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("gamma", [0.5, 2.0, 5.0])
@pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
def test_foup_cov_brownian_case(gamma: float, t: float) -> None:
    assert foup_cov(0.5, gamma, t) == pytest.approx(math.exp(-gamma * t), abs=1e-6)


def test_foup_cov_examples() -> None:
    assert foup_cov(0.5, 2.0, 1.0) == pytest.approx(0.135335, abs=1e-6)
    assert foup_cov(0.3, 1.0, 0.0) == 1.0
    assert foup_cov(0.5, 2.0, -1.0) == foup_cov(0.5, 2.0, 1.0)
    leading = foup_cov_leading(0.7, 1.0, 50.0)
    assert foup_cov(0.7, 1.0, 50.0) == pytest.approx(leading, rel=0.1)


@pytest.mark.parametrize("H", [0.25, 0.4, 0.6, 0.85])
@pytest.mark.parametrize("t", [0.2, 1.0, 4.0])
def test_foup_cov_matches_closed_form(H: float, t: float) -> None:
    assert foup_cov(H, 1.5, t) == pytest.approx(foup_cov_closed(H, 1.5, t), abs=1e-6)


def test_foup_cov_domain() -> None:
    with pytest.raises(DomainError):
        foup_cov(0.5, 0.0, 1.0)
    with pytest.raises(DomainError):
        foup_cov_closed(0.5, -1.0, 1.0)


def test_foup_cov_sq_integral() -> None:
    assert foup_cov_sq_integral(0.5, 3.0) == pytest.approx(1 / 3, abs=1e-8)
    assert foup_cov_sq_integral(0.25, 1.0) == pytest.approx(1 / math.pi, abs=1e-8)
    with pytest.raises(DivergentIntegral):
        foup_cov_sq_integral(0.75, 1.0)
