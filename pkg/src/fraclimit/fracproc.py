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


"""Fractional Brownian motion and fractional Ornstein-Uhlenbeck paths.

FBM paths are sampled exactly in distribution: fractional Gaussian noise on
the unit lattice comes from the circulant embedding of its autocovariance
(Davies-Harte), is rescaled by ``Δ^H`` and summed. When the embedding has
eigenvalues below ``-1e-10`` the dense Toeplitz covariance is factorized
instead, up to 2048 steps.

The FOUP ``B_γ,t = ∫_0^t e^{-γ(t-s)} dB_s`` is built from an FBM path by
integration by parts, ``B_γ,t = B_t - γ ∫_0^t e^{-γ(t-s)} B_s ds``.

Randomness always comes in as a seed, a ``SeedSequence`` or a ``Generator``;
identical seeds give bit-identical paths, and a batch row equals the single
path drawn with the same seed.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg, signal

from . import _typings as t
from ._quad import quad
from .constants import bracket, check_hurst, mu, xi_integral
from .errors import (
    BurnInTooShort,
    DivergentIntegral,
    DomainError,
    EmbeddingFailed,
    Overflow,
    ValidationError,
)
from .lru import memoize

__all__ = (
    "BURN_IN_TOL",
    "DENSE_LIMIT",
    "EXP_LIMIT",
    "FoupSpec",
    "GaussPath",
    "PathKind",
    "TimeGrid",
    "brownian_sample",
    "fbm_batch",
    "fbm_cov",
    "fbm_sample",
    "fgn_autocov",
    "foup_cov",
    "foup_cov_closed",
    "foup_cov_leading",
    "foup_cov_sq_integral",
    "foup_from_fbm",
    "foup_mantissa",
    "foup_stationary_batch",
    "foup_stationary_sample",
    "foup_transform",
    "spectral_density",
)

log = logging.getLogger(__name__)

type SeedLike = int | np.random.SeedSequence | np.random.Generator

DENSE_LIMIT = 2048
EXP_LIMIT = 700.0
BURN_IN_TOL = 1e-4
_EMBED_TOL = 1e-10


class PathKind(enum.StrEnum):
    FBM = "fbm"
    FOUP = "foup"
    STATIONARY_FOUP = "stationary_foup"
    BROWNIAN = "brownian"


@dataclass(frozen=True, slots=True)
class TimeGrid:
    """``n`` uniform steps on ``[0, horizon]``."""

    horizon: float
    n: int

    def __post_init__(self) -> None:
        if not self.horizon > 0.0:
            msg = f"Grid horizon must be positive, got {self.horizon}"
            raise ValidationError(msg)
        if self.n < 1:
            msg = f"Grid needs at least one step, got {self.n}"
            raise ValidationError(msg)

    @classmethod
    def from_step(cls, horizon: float, dt: float, /) -> TimeGrid:
        """Grid with step ``dt``; ``horizon / dt`` must be (close to) whole."""
        if not dt > 0.0:
            msg = f"Step must be positive, got {dt}"
            raise ValidationError(msg)
        n = round(horizon / dt)
        if n < 1 or not math.isclose(n * dt, horizon, rel_tol=1e-9):
            msg = f"Horizon {horizon} is not a whole number of steps of {dt}"
            raise ValidationError(msg)
        return cls(float(horizon), n)

    @property
    def dt(self) -> float:
        return self.horizon / self.n

    @property
    def times(self) -> t.FloatArray:
        return np.arange(self.n + 1, dtype=np.float64) * self.dt


@dataclass(frozen=True, slots=True)
class GaussPath:
    grid: TimeGrid
    values: t.FloatArray
    kind: PathKind
    hurst: float | None = None
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.n + 1,):
            msg = f"Expected {self.grid.n + 1} values, got shape {self.values.shape}"
            raise ValidationError(msg)
        self.values.setflags(write=False)

    @property
    def times(self) -> t.FloatArray:
        return self.grid.times


@dataclass(frozen=True, slots=True)
class FoupSpec:
    """Parameters of a (stationary) FOUP.

    ``burn_in`` defaults to ``10/γ``, which leaves an initial-condition
    weight ``e^{-γ burn_in}`` of about 4.5e-5.
    """

    H: float
    gamma: float
    burn_in: float | None = None

    def __post_init__(self) -> None:
        check_hurst(self.H)
        if self.burn_in is not None and self.burn_in < 0.0:
            msg = f"burn_in must be non-negative, got {self.burn_in}"
            raise ValidationError(msg)

    @property
    def default_burn_in(self) -> float:
        return 10.0 / self.gamma

    @property
    def effective_burn_in(self) -> float:
        return self.default_burn_in if self.burn_in is None else self.burn_in


def fbm_cov(H: float, s: t.Any, t_: t.Any, /) -> t.Any:
    """``½(|t|^{2H} + |s|^{2H} - |t-s|^{2H})``, broadcasting over arrays."""
    two_h = 2 * check_hurst(H)
    s_arr = np.abs(np.asarray(s, dtype=np.float64))
    t_arr = np.abs(np.asarray(t_, dtype=np.float64))
    lag = np.abs(np.asarray(t_, dtype=np.float64) - np.asarray(s, dtype=np.float64))
    out = 0.5 * (t_arr**two_h + s_arr**two_h - lag**two_h)
    return float(out) if out.ndim == 0 else out


def fgn_autocov(H: float, n: int, /) -> t.FloatArray:
    """Unit-lattice increment autocovariance at lags ``0..n``."""
    two_h = 2 * check_hurst(H)
    k = np.arange(n + 1, dtype=np.float64)
    return 0.5 * (np.abs(k + 1) ** two_h - 2 * k**two_h + np.abs(k - 1) ** two_h)


@memoize(maxsize=64)
def _circulant_root(H: float, n: int) -> t.FloatArray | None:
    acov = fgn_autocov(H, n)
    row = np.concatenate([acov, acov[-2:0:-1]])
    eig = np.fft.fft(row).real
    smallest = float(eig.min())
    if smallest < -_EMBED_TOL:
        log.info("Circulant embedding for H=%g, n=%d is not PSD (%.3g)", H, n, smallest)
        return None
    root = np.sqrt(np.clip(eig, 0.0, None) / row.size)
    root.setflags(write=False)
    return root


@memoize(maxsize=8)
def _dense_root(H: float, n: int) -> t.FloatArray:
    if n > DENSE_LIMIT:
        msg = (
            f"Circulant embedding failed for H={H}, n={n}; "
            f"the dense fallback is limited to {DENSE_LIMIT} steps"
        )
        raise EmbeddingFailed(msg)
    lam, vec = linalg.eigh(linalg.toeplitz(fgn_autocov(H, n - 1)))
    root = vec * np.sqrt(np.clip(lam, 0.0, None))
    root.setflags(write=False)
    return root


def _unit_fgn(H: float, n: int, gens: Sequence[np.random.Generator]) -> t.FloatArray:
    root = _circulant_root(H, n)
    if root is not None:
        m = root.size
        z = np.stack([g.standard_normal(m) + 1j * g.standard_normal(m) for g in gens])
        return np.fft.fft(root * z, axis=-1).real[:, :n]
    dense = _dense_root(H, n)
    z = np.stack([g.standard_normal(n) for g in gens])
    return z @ dense.T


def _gens(seeds: Sequence[SeedLike]) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in seeds]


def fbm_batch(H: float, grid: TimeGrid, seeds: Sequence[SeedLike], /) -> t.FloatArray:
    """One FBM path per seed, shape ``(len(seeds), n + 1)``; column 0 is zero."""
    H = check_hurst(H)
    if not seeds:
        return np.zeros((0, grid.n + 1))
    incr = _unit_fgn(H, grid.n, _gens(seeds)) * grid.dt**H
    out = np.zeros((len(seeds), grid.n + 1))
    out[:, 1:] = np.cumsum(incr, axis=-1)
    return out


def fbm_sample(H: float, grid: TimeGrid, seed: SeedLike, /) -> GaussPath:
    """Exact-in-distribution FBM path on ``grid``.

    Raises
    ------
    EmbeddingFailed
        If the embedding is not PSD and the grid is too long for the dense
        fallback.
    """
    values = fbm_batch(H, grid, [seed])[0]
    return GaussPath(grid, values, PathKind.FBM, hurst=float(H))


def brownian_sample(grid: TimeGrid, seed: SeedLike, /) -> GaussPath:
    gen = np.random.default_rng(seed)
    values = np.zeros(grid.n + 1)
    values[1:] = np.cumsum(gen.standard_normal(grid.n) * math.sqrt(grid.dt))
    return GaussPath(grid, values, PathKind.BROWNIAN, hurst=0.5)


def foup_transform(gamma: float, values: t.FloatArray, dt: float, /) -> t.FloatArray:
    """Map FBM values (last axis on a ``dt`` grid) to FOUP values.

    For ``γ >= 0`` the convolution ``I_k = ∫_0^{t_k} e^{-γ(t_k-s)} B_s ds``
    follows the exact exponential-weight recursion
    ``I_k = a I_{k-1} + Δ/2 (a B_{k-1} + B_k)`` with ``a = e^{-γΔ}``. For
    ``γ < 0`` the decaying integrand ``e^{γs} B_s`` is accumulated first and
    the growth ``e^{-γt}`` applied last.

    Raises
    ------
    Overflow
        If ``|γ| T`` exceeds :data:`EXP_LIMIT` for ``γ < 0``.
    """
    values = np.asarray(values, dtype=np.float64)
    if gamma == 0.0:
        return values.copy()
    if gamma > 0.0:
        a = math.exp(-gamma * dt)
        drive = np.zeros_like(values)
        drive[..., 1:] = 0.5 * dt * (a * values[..., :-1] + values[..., 1:])
        conv = signal.lfilter([1.0], [1.0, -a], drive, axis=-1)
        return values - gamma * conv
    times = np.arange(values.shape[-1], dtype=np.float64) * dt
    if -gamma * times[-1] > EXP_LIMIT:
        msg = f"|γ|T = {-gamma * times[-1]:g} leaves the float64 range (limit {EXP_LIMIT:g})"
        raise Overflow(msg)
    return np.exp(-gamma * times) * foup_mantissa(gamma, values, dt)


def foup_mantissa(gamma: float, values: t.FloatArray, dt: float, /) -> t.FloatArray:
    """``e^{γt} B_γ,t`` for ``γ < 0``, the bounded factor of an explosive FOUP.

    The exponent is ``|γ| t``; nothing here grows, so any ``|γ|`` is safe.
    """
    if gamma >= 0.0:
        msg = f"The mantissa form is for explosive paths, got γ={gamma}"
        raise DomainError(msg)
    values = np.asarray(values, dtype=np.float64)
    decay = np.exp(gamma * np.arange(values.shape[-1], dtype=np.float64) * dt)
    acc = integrate.cumulative_trapezoid(decay * values, dx=dt, axis=-1, initial=0.0)
    return decay * values - gamma * acc


def foup_from_fbm(gamma: float, path: GaussPath, /) -> GaussPath:
    if path.kind not in {PathKind.FBM, PathKind.BROWNIAN}:
        msg = f"FOUP needs an FBM driver, got a {path.kind} path"
        raise ValidationError(msg)
    values = foup_transform(float(gamma), path.values, path.grid.dt)
    return GaussPath(path.grid, values, PathKind.FOUP, hurst=path.hurst, gamma=float(gamma))


def _burn_in_steps(spec: FoupSpec, grid: TimeGrid) -> int:
    if not spec.gamma > 0.0:
        msg = f"A stationary FOUP needs γ > 0, got {spec.gamma}"
        raise ValidationError(msg)
    burn_in = spec.effective_burn_in
    steps = math.ceil(burn_in / grid.dt - 1e-9)
    residual = math.exp(-spec.gamma * steps * grid.dt)
    if residual > BURN_IN_TOL:
        msg = (
            f"burn_in={burn_in:g} leaves initial-condition weight {residual:.3g} "
            f"(> {BURN_IN_TOL:g}); use at least {math.log(1 / BURN_IN_TOL) / spec.gamma:.3g}"
        )
        log.warning(msg)
        warnings.warn(msg, BurnInTooShort, stacklevel=3)
    return steps


def foup_stationary_batch(
    spec: FoupSpec, grid: TimeGrid, seeds: Sequence[SeedLike], /
) -> t.FloatArray:
    """Unit-variance stationary FOUP paths, one row per seed.

    The zero-start FOUP runs on ``[-burn_in, T]`` and is scaled by
    ``γ^H μ_H^{1/2}``; the burn-in window is dropped. What remains of the
    initial condition is ``e^{-γ(t + burn_in)}`` times a unit-variance
    variable.
    """
    steps = _burn_in_steps(spec, grid)
    long_grid = TimeGrid((steps + grid.n) * grid.dt, steps + grid.n)
    driver = fbm_batch(spec.H, long_grid, seeds)
    scale = spec.gamma**spec.H * math.sqrt(mu(spec.H))
    return scale * foup_transform(spec.gamma, driver, grid.dt)[:, steps:]


def foup_stationary_sample(spec: FoupSpec, grid: TimeGrid, seed: SeedLike, /) -> GaussPath:
    values = foup_stationary_batch(spec, grid, [seed])[0]
    return GaussPath(
        grid, values, PathKind.STATIONARY_FOUP, hurst=spec.H, gamma=spec.gamma
    )


def spectral_density(H: float, gamma: float, xi: t.Any, /) -> t.Any:
    """``γ^{2H} π^{-1} sin(πH) |ξ|^{1-2H} / (γ² + ξ²)``; integrates to one."""
    H = check_hurst(H)
    x = np.abs(np.asarray(xi, dtype=np.float64))
    out = gamma ** (2 * H) / math.pi * math.sin(math.pi * H) * x ** (1 - 2 * H) / (gamma**2 + x**2)
    return float(out) if out.ndim == 0 else out


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma > 0.0:
        msg = f"The stationary covariance needs γ > 0, got {gamma}"
        raise DomainError(msg)
    return gamma


@memoize(maxsize=8192)
def foup_cov(H: float, gamma: float, t_: float, /, tol: float = 1e-7) -> float:
    """Correlation ``r_{H,γ}(t)`` of the stationary FOUP from its spectral density.

    With ``ξ = γx``, ``r(t) = (2 sin(πH)/π) ∫_0^∞ cos(γtx) x^{1-2H} / (1+x²) dx``.
    ``[0, 1]`` carries the ``x^{1-2H}`` endpoint as an algebraic weight;
    ``[1, ∞)`` is a Fourier integral (QUADPACK QAWF).

    Raises
    ------
    QuadratureFailed
        If either piece misses ``tol``.
    """
    H = check_hurst(H)
    gamma = _check_gamma(gamma)
    omega = gamma * abs(float(t_))
    if omega == 0.0:
        return 1.0
    near = quad(
        lambda x: math.cos(omega * x) / (1.0 + x * x), 0.0, 1.0,
        weight="alg", wvar=(1 - 2 * H, 0.0), what="FOUP covariance near zero", tol=tol,
    )
    far = quad(
        lambda x: x ** (1 - 2 * H) / (1.0 + x * x), 1.0, math.inf,
        weight="cos", wvar=omega, limlst=200, what="FOUP covariance tail", tol=tol,
    )
    return 2 * math.sin(math.pi * H) / math.pi * (near + far)


def foup_cov_closed(H: float, gamma: float, t_: float, /) -> float:
    """``r_{H,γ}(t) = b(γ|t|) / (2Γ(2H+1))`` from the incomplete-gamma bracket."""
    H = check_hurst(H)
    gamma = _check_gamma(gamma)
    return bracket(H, gamma * abs(t_)) / (2 * math.gamma(2 * H + 1))


def foup_cov_leading(H: float, gamma: float, t_: float, /) -> float:
    """Leading large-``t`` term ``γ^{2H-2} (2H-1)/Γ(2H) t^{2H-2}``."""
    H = check_hurst(H)
    return gamma ** (2 * H - 2) * (2 * H - 1) / math.gamma(2 * H) * abs(t_) ** (2 * H - 2)


def foup_cov_sq_integral(H: float, gamma: float, /) -> float:
    """``∫_ℝ r_{H,γ}(t)² dt = γ^{-1} sin²(πH) (4/π) J(H)``.

    Raises
    ------
    DivergentIntegral
        For ``H >= 3/4``.
    """
    H = check_hurst(H)
    gamma = _check_gamma(gamma)
    if H >= 0.75:
        msg = f"∫ r² is finite only for H < 3/4, got H={H}"
        raise DivergentIntegral(msg)
    return math.sin(math.pi * H) ** 2 * 4 / math.pi * xi_integral(H) / gamma
