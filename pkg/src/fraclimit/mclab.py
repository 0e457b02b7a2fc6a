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


"""Monte Carlo harness for the limit theorems of integrated functionals.

Every experiment draws replicate ``i`` from the generator derived from
``(seed, i)`` (see :mod:`fraclimit.workers`), normalizes each replicate's
statistic by its target scale, and only then summarizes. Results are
bit-reproducible from their configuration.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, stats

from . import _typings as t
from ._quad import quad
from .constants import (
    RegimeTag,
    boundary_coeff,
    boundary_hurst,
    h,
    quadratic_centering,
    regime,
    sigma,
    smoothing_bound,
)
from .errors import EmptySample, GridTooShort, ValidationError, WrongRegime
from .fracproc import (
    FoupSpec,
    GaussPath,
    TimeGrid,
    fbm_batch,
    foup_cov,
    foup_stationary_batch,
    foup_transform,
)
from .hermite import (
    Functional,
    HermiteExpansion,
    expand,
    hermite_functional,
    hermite_rank,
    sigma_weak_sq,
)
from .lru import memoize
from .workers import map_replicates

__all__ = (
    "DEFAULT_DT",
    "DEFAULT_REPS",
    "DEFAULT_SEED",
    "QUANTILE_LEVELS",
    "EmpiricalSummary",
    "ExperimentResult",
    "ScalingRow",
    "ScalingStudy",
    "SlowlyVaryingPair",
    "SmoothingReport",
    "SmoothingRow",
    "L_abs_eval",
    "L_eval",
    "boundary_experiment",
    "clt_experiment",
    "empirical_summary",
    "exact_variance",
    "integrate_functional",
    "ks_critical",
    "ks_statistic",
    "nclt_experiment",
    "rosenblatt_sample",
    "slowly_varying_pair",
    "smoothing_limit_check",
    "variance_scaling",
)

log = logging.getLogger(__name__)

DEFAULT_DT = 0.05
DEFAULT_REPS = 2000
DEFAULT_SEED = 20090101
QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)

# clt_experiment calls σ² degenerate below this fraction of Ef² · 2/γ
_DEGENERATE_FRACTION = 1e-3
_SMOOTHING_CUTOFF = 50.0

type PathFunctional = Functional | HermiteExpansion | Callable[[t.FloatArray], t.FloatArray]


def _apply(f: PathFunctional, values: t.FloatArray) -> t.FloatArray:
    return np.asarray(f(values), dtype=np.float64)


# -- statistics -------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class EmpiricalSummary:
    """Distributional fingerprint of a Monte Carlo sample.

    Standard errors are jackknife estimates. Skewness and kurtosis are the
    unbiased ``G1``/``G2`` estimators; when they are undefined (constant
    data, fewer than four points) they are NaN and ``moments_defined`` is
    False.
    """

    n: int
    mean: float
    mean_se: float
    variance: float
    variance_se: float
    skewness: float
    skewness_se: float
    excess_kurtosis: float
    excess_kurtosis_se: float
    quantiles: dict[float, float]
    ks_normal: float
    moments_defined: bool = True

    @property
    def iqr(self) -> float:
        return self.quantiles[0.75] - self.quantiles[0.25]

    def to_dict(self) -> dict[str, t.Any]:
        out = asdict(self)
        out["quantiles"] = {f"{k:g}": v for k, v in self.quantiles.items()}
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in out.items()}


def _skew(n: t.Any, m2: t.Any, m3: t.Any) -> t.Any:
    g1 = m3 / m2**1.5
    return np.sqrt(n * (n - 1)) / (n - 2) * g1


def _kurt(n: t.Any, m2: t.Any, m4: t.Any) -> t.Any:
    g2 = m4 / m2**2 - 3.0
    return (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6.0)


def _jackknife_se(values: t.FloatArray) -> float:
    n = values.size
    if n < 2 or not np.all(np.isfinite(values)):
        return math.nan
    dev = values - math.fsum(values) / n
    return math.sqrt((n - 1) / n * math.fsum(dev * dev))


def empirical_summary(sample: Sequence[float] | t.FloatArray, /) -> EmpiricalSummary:
    """Moments, quantiles and KS distance to ``N(0, 1)`` of a sample.

    Raises
    ------
    EmptySample
        For fewer than two points.
    """
    x = np.asarray(sample, dtype=np.float64).ravel()
    n = x.size
    if n < 2:
        msg = f"A summary needs at least two points, got {n}"
        raise EmptySample(msg)

    mean = math.fsum(x) / n
    d = x - mean
    s2, s3, s4 = (math.fsum(d**k) for k in (2, 3, 4))
    m2, m3, m4 = s2 / n, s3 / n, s4 / n
    variance = s2 / (n - 1)
    defined = m2 > 0.0 and n >= 4
    skew = float(_skew(n, m2, m3)) if defined else math.nan
    kurt = float(_kurt(n, m2, m4)) if defined else math.nan

    # leave-one-out power sums about the loo mean
    k = n - 1
    shift = -d / k
    l2 = (s2 - d**2) / k - shift**2
    l3 = (s3 - d**3) / k - 3 * shift * (s2 - d**2) / k + 2 * shift**3
    l4 = (
        (s4 - d**4) / k
        - 4 * shift * (s3 - d**3) / k
        + 6 * shift**2 * (s2 - d**2) / k
        - 3 * shift**4
    )
    mean_se = _jackknife_se(mean + shift)
    variance_se = _jackknife_se(l2 * k / (k - 1)) if k > 1 else math.nan
    if defined and n >= 5 and np.all(l2 > 0.0):
        skew_se = _jackknife_se(_skew(k, l2, l3))
        kurt_se = _jackknife_se(_kurt(k, l2, l4))
    else:
        skew_se = kurt_se = math.nan

    levels = np.quantile(x, QUANTILE_LEVELS)
    return EmpiricalSummary(
        n=n,
        mean=mean,
        mean_se=mean_se,
        variance=variance,
        variance_se=variance_se,
        skewness=skew,
        skewness_se=skew_se,
        excess_kurtosis=kurt,
        excess_kurtosis_se=kurt_se,
        quantiles=dict(zip(QUANTILE_LEVELS, map(float, levels), strict=True)),
        ks_normal=ks_statistic(x, stats.norm.cdf),
        moments_defined=defined,
    )


def ks_statistic(
    sample: Sequence[float] | t.FloatArray, cdf: Callable[[t.FloatArray], t.FloatArray], /
) -> float:
    """Two-sided one-sample Kolmogorov-Smirnov distance.

    Raises
    ------
    EmptySample
        If ``sample`` is empty.
    """
    x = np.asarray(sample, dtype=np.float64).ravel()
    if not x.size:
        msg = "KS statistic of an empty sample"
        raise EmptySample(msg)
    return float(stats.kstest(x, cdf).statistic)


def ks_critical(n: int, /, alpha: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value at level ``alpha``."""
    return float(stats.kstwobign.ppf(1.0 - alpha)) / math.sqrt(n)


# -- functionals of paths ---------------------------------------------------


def integrate_functional(
    path: GaussPath, f: PathFunctional, /, u: float = 1.0, *, horizon: float | None = None
) -> float:
    """Trapezoidal ``∫_0^{t u} f(N_s) ds`` along a sampled path.

    ``horizon`` defaults to the path horizon. A final partial step is integrated
    against the linearly interpolated path value.

    Raises
    ------
    GridTooShort
        If ``t u`` lies past the end of the path.
    """
    end_time = path.grid.horizon if horizon is None else float(horizon)
    if not 0.0 <= u <= 1.0:
        msg = f"u must lie in [0, 1], got {u}"
        raise ValidationError(msg)
    end = end_time * u
    dt = path.grid.dt
    if end > path.grid.horizon * (1 + 1e-12):
        msg = f"Path ends at {path.grid.horizon:g}, integral needs {end:g}"
        raise GridTooShort(msg)
    if end == 0.0:
        return 0.0
    whole = min(int(math.floor(end / dt + 1e-9)), path.grid.n)
    values = np.asarray(path.values[: whole + 1])
    fx = _apply(f, values)
    total = float(integrate.trapezoid(fx, dx=dt)) if whole else 0.0
    rest = end - whole * dt
    if rest > 1e-12 * dt and whole < path.grid.n:
        lo, hi = path.values[whole], path.values[whole + 1]
        mid = lo + (hi - lo) * rest / dt
        f_mid = float(_apply(f, np.array([mid]))[0])
        total += 0.5 * rest * (float(fx[-1]) + f_mid)
    return total


def _integrate_rows(values: t.FloatArray, f: PathFunctional, dt: float) -> t.FloatArray:
    return integrate.trapezoid(_apply(f, values), dx=dt, axis=-1)


# -- slowly varying norming -------------------------------------------------


def _pieces(gamma: float, end: float) -> list[tuple[float, float]]:
    edges = [0.0]
    edge = 0.25 / gamma
    while edge < end:
        edges.append(edge)
        edge *= 2.0
    edges.append(end)
    return list(zip(edges, edges[1:], strict=False))


@memoize(maxsize=4096)
def _moment_piece(
    H: float, gamma: float, q: int, lo: float, hi: float, weight: int, absolute: bool
) -> float:
    def integrand(u: float) -> float:
        r = foup_cov(H, gamma, u)
        val = abs(r) ** q if absolute else r**q
        return val * u**weight

    return quad(integrand, lo, hi, what=f"∫ u^{weight} r^{q}", tol=1e-6)


def _moment(H: float, gamma: float, q: int, t_: float, weight: int, absolute: bool) -> float:
    if t_ < 0.0:
        msg = f"L(t) needs t >= 0, got {t_}"
        raise ValidationError(msg)
    if t_ == 0.0:
        return 0.0
    if H == 0.5 and not weight:
        return -math.expm1(-q * gamma * t_) / (q * gamma)
    return math.fsum(
        _moment_piece(H, gamma, q, lo, hi, weight, absolute)
        for lo, hi in _pieces(gamma, t_)
    )


def L_eval(H: float, gamma: float, q: int, t_: float, /) -> float:
    """``L(t) = ∫_0^t r_{H,γ}(u)^q du``; exact for ``H = 1/2``."""
    return _moment(H, gamma, q, t_, 0, False)


def L_abs_eval(H: float, gamma: float, q: int, t_: float, /) -> float:
    """``∫_0^t |r_{H,γ}(u)|^q du``."""
    return _moment(H, gamma, q, t_, 0, True)


def exact_variance(H: float, gamma: float, q: int, t_: float, /) -> float:
    """``Var ∫_0^t H_q(N_s) ds = 2 q! (t L(t) - ∫_0^t u r^q(u) du)``."""
    first = _moment(H, gamma, q, t_, 1, False)
    return 2 * math.factorial(q) * (t_ * L_eval(H, gamma, q, t_) - first)


@dataclass(frozen=True, slots=True)
class SlowlyVaryingPair:
    H: float
    gamma: float
    q: int

    def L(self, t_: float, /) -> float:
        return L_eval(self.H, self.gamma, self.q, t_)

    def L_abs(self, t_: float, /) -> float:
        return L_abs_eval(self.H, self.gamma, self.q, t_)

    def ratio(self, t_: float, /) -> float:
        """``L_abs(t) / L(t)``; bounded whenever the boundary theorem applies."""
        return self.L_abs(t_) / self.L(t_)


def slowly_varying_pair(H: float, gamma: float, q: int, /) -> SlowlyVaryingPair:
    return SlowlyVaryingPair(float(H), float(gamma), int(q))


# -- experiments ------------------------------------------------------------


def _check_mc(reps: int, dt: float) -> None:
    if reps < 2:
        msg = f"Need at least two replicates, got {reps}"
        raise ValidationError(msg)
    if not dt > 0.0:
        msg = f"Step must be positive, got {dt}"
        raise ValidationError(msg)


@dataclass(frozen=True, slots=True)
class ExperimentResult:
    """A normalized Monte Carlo sample with its summary.

    ``scale`` is what each replicate's raw statistic was divided by;
    ``degenerate`` marks a target variance too small to normalize by.
    """

    name: str
    sample: t.FloatArray
    summary: EmpiricalSummary
    scale: float
    degenerate: bool = False
    config: dict[str, t.Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "experiment": self.name,
            "config": self.config,
            "scale": self.scale,
            "degenerate": self.degenerate,
            "summary": self.summary.to_dict(),
        }


def _stationary_integrals(
    H: float,
    gamma: float,
    horizon: float,
    dt: float,
    reps: int,
    seed: int,
    f: PathFunctional,
    *,
    stream: int | None = None,
    burn_in: float | None = None,
) -> t.FloatArray:
    spec = FoupSpec(H, gamma, burn_in)
    grid = TimeGrid.from_step(horizon, dt)

    def chunk(gens: Sequence[np.random.Generator]) -> t.FloatArray:
        return _integrate_rows(foup_stationary_batch(spec, grid, gens), f, dt)

    return map_replicates(chunk, reps, seed, stream=stream)


def _resolve(
    f: Functional | HermiteExpansion | int,
) -> tuple[HermiteExpansion, PathFunctional]:
    # the expansion fixes σ²; the path is integrated against the cheapest exact form
    if isinstance(f, HermiteExpansion):
        return f, f
    if isinstance(f, int):
        f = hermite_functional(f)
    return expand(f), f


def clt_experiment(
    f: Functional | HermiteExpansion | int,
    H: float,
    gamma: float,
    horizon: float,
    dt: float = DEFAULT_DT,
    reps: int = DEFAULT_REPS,
    seed: int = DEFAULT_SEED,
) -> ExperimentResult:
    """Weak regime: ``t^{-1/2} ∫_0^t f(N_s) ds / σ`` should be ``N(0, 1)``.

    ``σ²`` is the weak-dependence variance of ``f`` for the stationary FOUP
    correlation. An integer ``f`` means ``H_f``. If ``σ²`` is numerically
    zero (rank one with ``H < 1/2``), the sample is ``t^{-1/2} Z`` without
    normalization and the result is flagged degenerate.

    Raises
    ------
    WrongRegime
        Unless ``(rank, H)`` is in the weak regime.
    """
    _check_mc(reps, dt)
    e, fn = _resolve(f)
    q = hermite_rank(e)
    if regime(q, H).tag is not RegimeTag.WEAK:
        msg = f"clt_experiment needs the weak regime, (q, H) = ({q}, {H}) is not"
        raise WrongRegime(msg)
    var = sigma_weak_sq(e, lambda u: foup_cov(H, gamma, u)).corrected
    degenerate = var < _DEGENERATE_FRACTION * e.second_moment * 2.0 / gamma
    scale = math.sqrt(horizon) * (1.0 if degenerate else math.sqrt(var))
    if degenerate:
        log.info("σ² = %.3g is degenerate for q=%d, H=%g; reporting t^-1/2 Z", var, q, H)

    raw = _stationary_integrals(H, gamma, horizon, dt, reps, seed, fn)
    sample = raw / scale
    return ExperimentResult(
        "clt",
        sample,
        empirical_summary(sample),
        scale,
        degenerate,
        {
            "q": q, "H": H, "gamma": gamma, "t": horizon, "dt": dt,
            "reps": reps, "seed": seed, "sigma_sq": var,
        },
    )


def boundary_experiment(
    q: int,
    gamma: float,
    horizon: float,
    dt: float = DEFAULT_DT,
    reps: int = DEFAULT_REPS,
    seed: int = DEFAULT_SEED,
) -> ExperimentResult:
    """``H = 1 - 1/(2q)``: ``(t log t)^{-1/2} ∫_0^t H_q(N_s) ds`` over its limit scale.

    Raises
    ------
    WrongRegime
        For ``q < 2``.
    """
    _check_mc(reps, dt)
    if q < 2:
        msg = f"The boundary regime needs q >= 2, got {q}"
        raise WrongRegime(msg)
    H = boundary_hurst(q)
    scale = math.sqrt(horizon * math.log(horizon)) * boundary_coeff(q, H, gamma)
    raw = _stationary_integrals(H, gamma, horizon, dt, reps, seed, hermite_functional(q))
    sample = raw / scale
    return ExperimentResult(
        "boundary",
        sample,
        empirical_summary(sample),
        scale,
        config={"q": q, "H": H, "gamma": gamma, "t": horizon, "dt": dt, "reps": reps, "seed": seed},
    )


def rosenblatt_sample(
    H: float,
    gamma: float = 1.0,
    horizon: float = 800.0,
    dt: float = DEFAULT_DT,
    reps: int = DEFAULT_REPS,
    seed: int = DEFAULT_SEED,
) -> t.FloatArray:
    """Approximate unit-variance Rosenblatt marginals, ``H > 3/4``.

    Each value is ``t^{1-2H} ∫_0^t [B_γ,s² - Γ(2H+1)/(2γ^{2H})] ds / (h_H(γ) σ_H)``
    at finite ``t``, so it carries the finite-``t`` bias of that functional.
    """
    _check_mc(reps, dt)
    if not H > 0.75:
        msg = f"Rosenblatt limits need H > 3/4, got {H}"
        raise WrongRegime(msg)
    centering = quadratic_centering(H, gamma)
    # unit-variance N back to B_γ: divide by γ^H μ_H^{1/2}, i.e. multiply N² by centering
    raw = _stationary_integrals(
        H, gamma, horizon, dt, reps, seed, lambda x: centering * (x * x - 1.0)
    )
    return raw * horizon ** (1 - 2 * H) / (h(H, gamma) * sigma(H))


def nclt_experiment(
    q: int,
    H: float,
    gamma: float,
    horizon: float,
    dt: float = DEFAULT_DT,
    reps: int = DEFAULT_REPS,
    seed: int = DEFAULT_SEED,
) -> ExperimentResult:
    """Strong regime, rank two: the normalized quadratic functional.

    Its variance should approach one and its excess kurtosis stays positive.

    Raises
    ------
    WrongRegime
        Unless ``q = 2`` and ``H > 3/4``.
    """
    if q != 2 or not H > 0.75:
        msg = f"nclt_experiment needs q = 2 and H > 3/4, got q={q}, H={H}"
        raise WrongRegime(msg)
    sample = rosenblatt_sample(H, gamma, horizon, dt, reps, seed)
    scale = h(H, gamma) * sigma(H) / horizon ** (1 - 2 * H)
    return ExperimentResult(
        "nclt",
        sample,
        empirical_summary(sample),
        scale,
        config={"q": q, "H": H, "gamma": gamma, "t": horizon, "dt": dt, "reps": reps, "seed": seed},
    )


@dataclass(frozen=True, slots=True)
class ScalingRow:
    horizon: float
    variance: float
    ratio: float
    finite_ratio: float
    L: float
    L_ratio: float
    summary: EmpiricalSummary

    def to_dict(self) -> dict[str, t.Any]:
        out: dict[str, t.Any] = {"t": self.horizon}
        out.update(
            (k, getattr(self, k)) for k in ("variance", "ratio", "finite_ratio", "L", "L_ratio")
        )
        out["summary"] = self.summary.to_dict()
        return out


@dataclass(frozen=True, slots=True)
class ScalingStudy:
    """Variance of ``∫_0^t H_q(N_s) ds`` along a ladder of horizons.

    ``ratio`` compares with the asymptotic ``2 q! t L(t)`` and
    ``finite_ratio`` with the exact finite-``t`` second moment.
    """

    rows: tuple[ScalingRow, ...]
    config: dict[str, t.Any]

    @property
    def t_ladder(self) -> tuple[float, ...]:
        return tuple(r.horizon for r in self.rows)

    def log_slope(self) -> float:
        """Least-squares slope of log-ratio against log-t."""
        x = np.log(self.t_ladder)
        y = np.log([r.ratio for r in self.rows])
        return float(np.polyfit(x, y, 1)[0])

    def to_dict(self) -> dict[str, t.Any]:
        return {"config": self.config, "rows": [r.to_dict() for r in self.rows]}


def variance_scaling(
    q: int,
    H: float,
    gamma: float,
    t_ladder: Sequence[float],
    reps: int = DEFAULT_REPS,
    dt: float = DEFAULT_DT,
    seed: int = DEFAULT_SEED,
) -> ScalingStudy:
    """Empirical ``Var ∫_0^t H_q(N_s) ds`` against ``2 q! t L(t)`` per rung.

    Rung ``j`` draws its replicates from stream ``j`` of ``seed``.
    """
    if reps < 500:
        msg = f"variance_scaling needs reps >= 500, got {reps}"
        raise ValidationError(msg)
    _check_mc(reps, dt)
    ladder = [float(x) for x in t_ladder]
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:], strict=False)):
        msg = f"t_ladder must be non-empty and strictly increasing, got {ladder}"
        raise ValidationError(msg)

    pair = slowly_varying_pair(H, gamma, q)
    f = hermite_functional(q)
    rows: list[ScalingRow] = []
    for rung, horizon in enumerate(ladder):
        raw = _stationary_integrals(H, gamma, horizon, dt, reps, seed, f, stream=rung)
        summary = empirical_summary(raw)
        big_l = pair.L(horizon)
        rows.append(
            ScalingRow(
                horizon=horizon,
                variance=summary.variance,
                ratio=summary.variance / (2 * math.factorial(q) * horizon * big_l),
                finite_ratio=summary.variance / exact_variance(H, gamma, q, horizon),
                L=big_l,
                L_ratio=pair.L_abs(horizon) / big_l,
                summary=summary,
            )
        )
        log.info("t=%g: variance ratio %.4f", horizon, rows[-1].ratio)
    config = {"q": q, "H": H, "gamma": gamma, "t_ladder": ladder, "dt": dt, "reps": reps, "seed": seed}
    return ScalingStudy(tuple(rows), config)


@dataclass(frozen=True, slots=True)
class SmoothingRow:
    horizon: float
    value: float
    bound: float | None


@dataclass(frozen=True, slots=True)
class SmoothingReport:
    """``value`` is a sup-error (deterministic) or a variance ratio (stochastic)."""

    mode: t.Literal["deterministic", "stochastic"]
    rows: tuple[SmoothingRow, ...]
    config: dict[str, t.Any]

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "mode": self.mode,
            "config": self.config,
            "rows": [{"t": r.horizon, "value": r.value, "bound": r.bound} for r in self.rows],
        }


def _smoothed(psi: Callable[[float], float], gamma: float, time: float, v: float) -> float:
    # u = γt(v - s) turns t ∫_0^v e^{γt(s-v)} ψ(s) ds into (1/γ) ∫ e^{-u} ψ(v - u/(γt)) du
    scale = gamma * time
    upper = min(scale * v, _SMOOTHING_CUTOFF)
    if upper == 0.0:
        return 0.0
    val = quad(
        lambda u: math.exp(-u) * psi(v - u / scale), 0.0, upper, what="smoothing integral"
    )
    return val / gamma


def smoothing_limit_check(
    H: float,
    gamma: float,
    t_ladder: Sequence[float],
    *,
    psi: Callable[[float], float] | None = None,
    holder: tuple[float, float] = (1.0, 1.0),
    v_points: int = 201,
    reps: int = DEFAULT_REPS,
    dt: float = DEFAULT_DT,
    seed: int = DEFAULT_SEED,
) -> SmoothingReport:
    """Convergence of the exponential smoothing to ``ψ/γ`` or ``B^H/γ``.

    With ``psi`` given, each rung reports ``sup_{v ∈ [0,1]}`` of the
    deterministic error next to the bound for Hölder constants
    ``holder = (C, β)``. Without it, each rung reports the variance of
    ``t^{-H} ∫_0^t B_γ,s ds`` over FOUP paths started at zero, relative to
    ``γ^{-2}``.
    """
    if not gamma > 0.0:
        msg = f"Smoothing needs γ > 0, got {gamma}"
        raise ValidationError(msg)
    ladder = [float(x) for x in t_ladder]
    if psi is not None:
        grid = np.linspace(0.0, 1.0, v_points)
        c_t, beta = holder
        rows = tuple(
            SmoothingRow(
                horizon,
                max(abs(_smoothed(psi, gamma, horizon, float(v)) - psi(float(v)) / gamma) for v in grid),
                smoothing_bound(horizon, gamma, c_t, beta),
            )
            for horizon in ladder
        )
        return SmoothingReport(
            "deterministic", rows, {"gamma": gamma, "t_ladder": ladder, "C": c_t, "beta": beta}
        )

    _check_mc(reps, dt)
    out: list[SmoothingRow] = []
    for rung, horizon in enumerate(ladder):
        grid_t = TimeGrid.from_step(horizon, dt)

        def chunk(gens: Sequence[np.random.Generator], grid_t: TimeGrid = grid_t) -> t.FloatArray:
            paths = foup_transform(gamma, fbm_batch(H, grid_t, gens), dt)
            return integrate.trapezoid(paths, dx=dt, axis=-1)

        raw = map_replicates(chunk, reps, seed, stream=rung) * grid_t.horizon**-H
        ratio = empirical_summary(raw).variance * gamma**2
        out.append(SmoothingRow(horizon, ratio, None))
    return SmoothingReport(
        "stochastic",
        tuple(out),
        {"H": H, "gamma": gamma, "t_ladder": ladder, "dt": dt, "reps": reps, "seed": seed},
    )
