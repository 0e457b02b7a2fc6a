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


"""Near-unit-root AR(1) models and their FOUP limit functionals.

The discrete side is ``X_t = β_n X_{t-1} + ε_t`` with ``β_n = 1 - γ/n`` and
the least squares statistics ``b̂_n`` and ``τ̂_n``. The continuous side is
the vector

    τ_H(γ) = (Q^{-1/2}, Q^{-1}, A Q^{-1/2}, A Q^{-1}),
    Q = ∫_0^1 B_γ,s² ds,  A = B_γ,1² / 2 + γ Q,

of a zero-start FOUP on ``[0, 1]``, and ``τ̄(γ) = τ_3 - τ_1 / 2``.

Explosive paths (``γ < 0``) are handled through the bounded mantissa
``m_s = e^{γs} B_γ,s``. With ``g = |γ|`` and ``w_s = e^{g(s-1)}``,

    e^{-2g} Q = ∫ w_s² m_s² ds,   e^{-g} A = ∫ w_s m_s ∘ dB_s,

so the rescaled vector is assembled from quantities of order one and
nothing is ever multiplied by ``e^{g}``.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal, stats

from . import _typings as t
from .constants import b_vec_31, check_hurst, explosive_target, scaling_matrix_31
from .errors import DegeneratePath, DegenerateSeries, DomainError, Overflow, ValidationError
from .fracproc import (
    EXP_LIMIT,
    GaussPath,
    TimeGrid,
    fbm_batch,
    foup_mantissa,
    foup_transform,
)
from .mclab import (
    DEFAULT_REPS,
    DEFAULT_SEED,
    EmpiricalSummary,
    ExperimentResult,
    empirical_summary,
)
from .workers import map_replicates

__all__ = (
    "DEFAULT_UNIT_DT",
    "EXPLOSIVE_RESOLUTION",
    "Ar1Config",
    "ComponentSample",
    "DiscreteCheck",
    "Innovation",
    "TauVector",
    "discrete_check",
    "lse",
    "simulate_ar1",
    "simulate_ar1_batch",
    "tau_bar",
    "tau_hat",
    "tau_vector",
    "taubar_sample",
    "thm31_sample",
    "thm32_sample",
    "unit_root_functional",
)

log = logging.getLogger(__name__)

DEFAULT_UNIT_DT = 1e-4
# largest |γ| Δ for which the boundary layer of width 1/|γ| is resolved
EXPLOSIVE_RESOLUTION = 0.05


class Innovation(enum.StrEnum):
    IID_NORMAL = "iid_normal"
    FGN = "fgn"


@dataclass(frozen=True, slots=True)
class Ar1Config:
    """``X_t = (1 - γ/n) X_{t-1} + ε_t`` for ``t = 1..n``, ``X_0 = 0``.

    ``fgn`` innovations are the unit-lag increments of an FBM path with Hurst
    index ``hurst``, scaled to variance ``sigma2``.
    """

    n: int
    gamma: float
    innovation: Innovation = Innovation.IID_NORMAL
    hurst: float | None = None
    sigma2: float = 1.0
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.n < 2:
            msg = f"An AR(1) series needs n >= 2, got {self.n}"
            raise ValidationError(msg)
        if not math.isfinite(self.gamma):
            msg = f"γ must be finite, got {self.gamma}"
            raise ValidationError(msg)
        if self.sigma2 < 0.0:
            msg = f"Innovation variance must be non-negative, got {self.sigma2}"
            raise ValidationError(msg)
        object.__setattr__(self, "innovation", Innovation(self.innovation))
        if self.innovation is Innovation.FGN:
            if self.hurst is None:
                msg = "fgn innovations need a Hurst index"
                raise ValidationError(msg)
            object.__setattr__(self, "hurst", check_hurst(self.hurst))

    @property
    def beta(self) -> float:
        return 1.0 - self.gamma / self.n


def _innovations(cfg: Ar1Config, gens: Sequence[np.random.Generator]) -> t.FloatArray:
    scale = math.sqrt(cfg.sigma2)
    if cfg.innovation is Innovation.IID_NORMAL:
        return scale * np.stack([g.standard_normal(cfg.n) for g in gens])
    assert cfg.hurst is not None
    paths = fbm_batch(cfg.hurst, TimeGrid(float(cfg.n), cfg.n), gens)
    return scale * np.diff(paths, axis=-1)


def simulate_ar1_batch(cfg: Ar1Config, gens: Sequence[np.random.Generator], /) -> t.FloatArray:
    """One series per generator, shape ``(len(gens), n + 1)``."""
    eps = _innovations(cfg, gens)
    out = np.zeros((len(gens), cfg.n + 1))
    out[:, 1:] = signal.lfilter([1.0], [1.0, -cfg.beta], eps, axis=-1)
    return out


def simulate_ar1(cfg: Ar1Config, /) -> t.FloatArray:
    """The series ``X_0..X_n`` drawn from ``cfg.seed``."""
    return simulate_ar1_batch(cfg, [np.random.default_rng(cfg.seed)])[0]


def _lse_parts(x: t.FloatArray) -> tuple[t.Any, t.Any]:
    lag, lead = x[..., :-1], x[..., 1:]
    return np.sum(lead * lag, axis=-1), np.sum(lag * lag, axis=-1)


def _as_series(series: Sequence[float] | t.FloatArray) -> t.FloatArray:
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        msg = f"Need a series of at least two values, got shape {x.shape}"
        raise ValidationError(msg)
    return x


def lse(series: Sequence[float] | t.FloatArray, /) -> float:
    """``b̂_n = Σ X_{t+1} X_t / Σ X_t²``, sums over ``t = 0..n-1``.

    Raises
    ------
    DegenerateSeries
        If ``Σ X_t²`` is zero.
    """
    x = _as_series(series)
    num, den = _lse_parts(x)
    if den == 0.0:
        msg = "Least squares estimate of an all-zero series"
        raise DegenerateSeries(msg)
    return float(num / den)


def tau_hat(series: Sequence[float] | t.FloatArray, beta: float, /) -> float:
    """``τ̂_n = (Σ X_t²)^{1/2} (b̂_n - β)``."""
    x = _as_series(series)
    _, den = _lse_parts(x)
    return math.sqrt(float(den)) * (lse(x) - beta)


def _tau_hat_rows(x: t.FloatArray, beta: float) -> t.FloatArray:
    num, den = _lse_parts(x)
    if np.any(den == 0.0):
        msg = "A simulated series is identically zero"
        raise DegenerateSeries(msg)
    return np.sqrt(den) * (num / den - beta)


@dataclass(frozen=True, slots=True)
class TauVector:
    """``τ_H(γ)`` for one path, with the ``Q`` and ``A`` it was built from."""

    tau1: float
    tau2: float
    tau3: float
    tau4: float
    Q: float
    A: float

    @classmethod
    def of(cls, Q: float, A: float) -> TauVector:
        root = math.sqrt(Q)
        return cls(1.0 / root, 1.0 / Q, A / root, A / Q, Q, A)

    def as_array(self) -> t.FloatArray:
        return np.array([self.tau1, self.tau2, self.tau3, self.tau4])

    @property
    def bar(self) -> float:
        return self.tau3 - 0.5 * self.tau1


def _unit_values(path: GaussPath | Sequence[float] | t.FloatArray) -> t.FloatArray:
    if isinstance(path, GaussPath):
        if not math.isclose(path.grid.horizon, 1.0, rel_tol=1e-12):
            msg = f"τ functionals live on [0, 1], path ends at {path.grid.horizon:g}"
            raise ValidationError(msg)
        return np.asarray(path.values)
    values = np.asarray(path, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        msg = f"Need path values on a grid of [0, 1], got shape {values.shape}"
        raise ValidationError(msg)
    return values


def _q_and_a(gamma: float, values: t.FloatArray) -> tuple[t.Any, t.Any]:
    dt = 1.0 / (values.shape[-1] - 1)
    Q = integrate.trapezoid(values * values, dx=dt, axis=-1)
    return Q, 0.5 * values[..., -1] ** 2 + gamma * Q


def tau_vector(
    H: float, gamma: float, path: GaussPath | Sequence[float] | t.FloatArray, /
) -> TauVector:
    """``τ_H(γ)`` of a FOUP path on ``[0, 1]``; ``Q`` is a trapezoid sum.

    A bare array is read as values on a uniform grid of ``[0, 1]``.

    Raises
    ------
    DegeneratePath
        If ``∫ B_γ² = 0``.
    """
    check_hurst(H)
    Q, A = _q_and_a(gamma, _unit_values(path))
    if not Q > 0.0:
        msg = "τ functionals of a path with ∫B² = 0"
        raise DegeneratePath(msg)
    return TauVector.of(float(Q), float(A))


def tau_bar(gamma: float, path: GaussPath | Sequence[float] | t.FloatArray, /) -> float:
    """``τ̄(γ) = τ_3 - τ_1 / 2`` of a Brownian-driven FOUP path."""
    if isinstance(path, GaussPath) and path.hurst not in {None, 0.5}:
        msg = f"τ̄ is defined for Brownian drivers, got H={path.hurst}"
        raise ValidationError(msg)
    return tau_vector(0.5, gamma, path).bar


def unit_root_functional(path: GaussPath | Sequence[float] | t.FloatArray, /) -> float:
    """``½ (W_1² - 1) (∫_0^1 W_s² ds)^{-1/2}``, assembled directly."""
    w = _unit_values(path)
    Q = float(integrate.trapezoid(w * w, dx=1.0 / (w.size - 1)))
    if not Q > 0.0:
        msg = "Unit root functional of a path with ∫W² = 0"
        raise DegeneratePath(msg)
    return 0.5 * (float(w[-1]) ** 2 - 1.0) / math.sqrt(Q)


def _tau_rows(gamma: float, values: t.FloatArray) -> t.FloatArray:
    Q, A = _q_and_a(gamma, values)
    if np.any(Q <= 0.0):
        msg = "A simulated path has ∫B² = 0"
        raise DegeneratePath(msg)
    root = np.sqrt(Q)
    return np.stack([1.0 / root, 1.0 / Q, A / root, A / Q], axis=-1)


def _unit_grid(dt: float) -> TimeGrid:
    return TimeGrid.from_step(1.0, dt)


def _check_reps(reps: int) -> None:
    if reps < 2:
        msg = f"Need at least two replicates, got {reps}"
        raise ValidationError(msg)


@dataclass(frozen=True, slots=True)
class ComponentSample:
    """A ``(reps, 4)`` sample of a rescaled ``τ_H(γ)`` with per-column summaries."""

    name: str
    sample: t.FloatArray
    summaries: tuple[EmpiricalSummary, ...]
    target: t.FloatArray | None = None
    config: dict[str, t.Any] = field(default_factory=dict)

    @classmethod
    def of(
        cls,
        name: str,
        sample: t.FloatArray,
        *,
        target: t.FloatArray | None = None,
        config: dict[str, t.Any] | None = None,
    ) -> ComponentSample:
        summaries = tuple(empirical_summary(col) for col in sample.T)
        return cls(name, sample, summaries, target, config or {})

    def column(self, i: int, /) -> t.FloatArray:
        """Component ``i``, counted from one."""
        return self.sample[:, i - 1]

    def correlation(self, i: int, j: int, /) -> float:
        return float(np.corrcoef(self.column(i), self.column(j))[0, 1])

    def to_dict(self) -> dict[str, t.Any]:
        out: dict[str, t.Any] = {
            "experiment": self.name,
            "config": self.config,
            "components": [s.to_dict() for s in self.summaries],
            "corr_1_3": self.correlation(1, 3),
        }
        if self.target is not None:
            out["target"] = self.target.tolist()
        return out


def taubar_sample(
    gamma: float,
    reps: int = DEFAULT_REPS,
    dt: float = DEFAULT_UNIT_DT,
    seed: int = DEFAULT_SEED,
    *,
    stream: int | None = None,
) -> ExperimentResult:
    """``τ̄(γ)`` over Brownian-driven FOUP paths on ``[0, 1]``.

    For ``|γ| -> ∞`` the law approaches ``N(0, 1)``.
    """
    _check_reps(reps)
    grid = _unit_grid(dt)

    def chunk(gens: Sequence[np.random.Generator]) -> t.FloatArray:
        values = foup_transform(gamma, fbm_batch(0.5, grid, gens), dt)
        rows = _tau_rows(gamma, values)
        return rows[:, 2] - 0.5 * rows[:, 0]

    sample = map_replicates(chunk, reps, seed, stream=stream)
    return ExperimentResult(
        "taubar",
        sample,
        empirical_summary(sample),
        1.0,
        config={"gamma": gamma, "reps": reps, "dt": dt, "seed": seed},
    )


def thm31_sample(
    H: float,
    gamma: float,
    reps: int = DEFAULT_REPS,
    dt: float = DEFAULT_UNIT_DT,
    seed: int = DEFAULT_SEED,
) -> ComponentSample:
    """``D_H(γ)(τ_H(γ) - b_H(γ))`` from FOUP paths simulated directly on ``[0, 1]``.

    For ``γ -> ∞`` the columns approach ``Σ_H (Z, Y²)'`` for ``H <= 3/4``
    and ``Σ_H (R_H, Y²)'`` beyond.

    Raises
    ------
    DomainError
        For ``γ <= 1``.
    """
    _check_reps(reps)
    D = np.diag(scaling_matrix_31(H, gamma))
    b = b_vec_31(H, gamma)
    grid = _unit_grid(dt)

    def chunk(gens: Sequence[np.random.Generator]) -> t.FloatArray:
        values = foup_transform(gamma, fbm_batch(H, grid, gens), dt)
        return (_tau_rows(gamma, values) - b) * D

    sample = map_replicates(chunk, reps, seed)
    return ComponentSample.of(
        "thm31",
        sample,
        config={"H": H, "gamma": gamma, "reps": reps, "dt": dt, "seed": seed},
    )


def _explosive_rows(H: float, g: float, driver: t.FloatArray, dt: float) -> t.FloatArray:
    m = foup_mantissa(-g, driver, dt)
    w = np.exp(g * (np.arange(driver.shape[-1]) * dt - 1.0))
    wm = w * m
    # e^{-2g} Q and e^{-g} A, both of order one
    q_t = integrate.trapezoid(wm * wm, dx=dt, axis=-1)
    s_t = np.sum(0.5 * (wm[..., 1:] + wm[..., :-1]) * np.diff(driver, axis=-1), axis=-1)
    if np.any(q_t <= 0.0):
        msg = "A simulated path has ∫B² = 0"
        raise DegeneratePath(msg)
    root = np.sqrt(q_t)
    return np.stack(
        [
            g ** (-(2 * H + 1) / 2) / root,
            g ** (-2 * H - 1) / q_t,
            g ** ((2 * H - 1) / 2) * s_t / root,
            s_t / (g * q_t),
        ],
        axis=-1,
    )


def thm32_sample(
    H: float,
    gamma: float,
    reps: int = DEFAULT_REPS,
    dt: float = 1e-3,
    seed: int = DEFAULT_SEED,
) -> ComponentSample:
    """The explosive rescaling of ``τ_H(γ)``, ``γ < 0``.

    Columns are ``diag(g^{-(2H+1)/2} e^g, g^{-2H-1} e^{2g}, g^{(2H-1)/2},
    g^{-1} e^g) τ_H(γ)`` with ``g = |γ|``; their limit is
    ``explosive_target(H) * (|Z|^{-1}, Z^{-2}, Y sign(Z), Y/Z)``. The target
    is attached but not divided out.

    Raises
    ------
    DomainError
        For ``γ >= 0``.
    Overflow
        If ``e^{2|γ|}`` leaves the float64 range.
    ValidationError
        If ``|γ| Δ`` exceeds :data:`EXPLOSIVE_RESOLUTION`.
    """
    _check_reps(reps)
    H = check_hurst(H)
    if not gamma < 0.0:
        msg = f"The explosive rescaling needs γ < 0, got {gamma}"
        raise DomainError(msg)
    g = -float(gamma)
    if 2.0 * g > EXP_LIMIT:
        msg = f"e^(2|γ|) with |γ| = {g:g} leaves the float64 range"
        raise Overflow(msg)
    if g * dt > EXPLOSIVE_RESOLUTION:
        msg = f"Step {dt:g} does not resolve |γ| = {g:g}; need |γ|Δ <= {EXPLOSIVE_RESOLUTION}"
        raise ValidationError(msg)
    grid = _unit_grid(dt)

    def chunk(gens: Sequence[np.random.Generator]) -> t.FloatArray:
        return _explosive_rows(H, g, fbm_batch(H, grid, gens), dt)

    sample = map_replicates(chunk, reps, seed)
    return ComponentSample.of(
        "thm32",
        sample,
        target=explosive_target(H),
        config={"H": H, "gamma": gamma, "reps": reps, "dt": dt, "seed": seed},
    )


@dataclass(frozen=True, slots=True)
class DiscreteCheck:
    """Two-sample comparison of ``τ̂_n`` against ``τ̄(γ)``."""

    statistic: float
    pvalue: float
    tau_hat: EmpiricalSummary
    tau_bar: EmpiricalSummary
    config: dict[str, t.Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "experiment": "discrete",
            "config": self.config,
            "ks_2samp": self.statistic,
            "pvalue": self.pvalue,
            "tau_hat": self.tau_hat.to_dict(),
            "tau_bar": self.tau_bar.to_dict(),
        }


def discrete_check(
    n: int,
    gamma: float,
    reps: int = DEFAULT_REPS,
    seed: int = DEFAULT_SEED,
    dt: float = 1e-3,
) -> DiscreteCheck:
    """Compare ``τ̂_n`` of the Gaussian AR(1) with ``β_n = 1 - γ/n`` to ``τ̄(γ)``.

    Only Brownian (iid normal) innovations are covered; both samples use
    their own seed stream.
    """
    _check_reps(reps)
    cfg = Ar1Config(n, gamma, seed=seed)

    def chunk(gens: Sequence[np.random.Generator]) -> t.FloatArray:
        return _tau_hat_rows(simulate_ar1_batch(cfg, gens), cfg.beta)

    hats = map_replicates(chunk, reps, seed, stream=0)
    bars = taubar_sample(gamma, reps, dt, seed, stream=1).sample
    res = stats.ks_2samp(hats, bars)
    log.debug("discrete check n=%d γ=%g: D=%.4f p=%.3g", n, gamma, res.statistic, res.pvalue)
    return DiscreteCheck(
        float(res.statistic),
        float(res.pvalue),
        empirical_summary(hats),
        empirical_summary(bars),
        {"n": n, "gamma": gamma, "reps": reps, "dt": dt, "seed": seed},
    )
