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


"""Norming constants, scaling matrices and regime boundaries.

Everything here is a pure function of ``(q, H, γ)``. Improper integrals
are evaluated with QUADPACK through :func:`fraclimit._quad.quad`; the ones
reused across a run are memoized.

The stationary FOUP covariance has the closed form
``r(t) = b(γ|t|) / (2Γ(2H+1))`` with

    b(u) = Γ(2H+1) e^{-u} + 2H [e^u ∫_u^∞ e^{-s} s^{2H-1} ds
                                 - e^{-u} ∫_0^u e^s s^{2H-1} ds],

the bracket that also defines ``I_{q,H} = ∫_0^∞ b^q``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, fields

import numpy as np
from scipy import special

from . import _typings as t
from ._quad import quad
from .errors import DivergentIntegral, DomainError, ValidationError
from .lru import memoize

__all__ = (
    "I_qH",
    "NormalizationBundle",
    "Regime",
    "RegimeTag",
    "b_vec_31",
    "boundary_coeff",
    "boundary_hurst",
    "bracket",
    "check_hurst",
    "explosive_target",
    "g",
    "h",
    "kappa",
    "mu",
    "nclt_coeff",
    "normalization_bundle",
    "quadratic_centering",
    "regime",
    "scaling_matrix_31",
    "sigma",
    "sigma_matrix_31",
    "smoothing_bound",
    "weak_variance_closed",
    "xi_integral",
    "xi_integral_beta",
)

log = logging.getLogger(__name__)

# numeric part of I_{q,H}; the remainder comes from the asymptotic expansion of b
_I_QH_HORIZON = 200.0
_I_QH_BREAKS = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, _I_QH_HORIZON)
_Q_SWITCH = 40.0


def check_hurst(H: float, /) -> float:
    H = float(H)
    if not 0.0 < H < 1.0:
        msg = f"Hurst index must lie strictly inside (0, 1), got {H}"
        raise ValidationError(msg)
    return H


def _check_rank(q: int) -> int:
    if q < 1:
        msg = f"Hermite rank must be at least 1, got {q}"
        raise ValidationError(msg)
    return int(q)


def _check_rate(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma > 0.0:
        msg = f"γ must be positive, got {gamma}"
        raise DomainError(msg)
    return gamma


def boundary_hurst(q: int, /) -> float:
    """``1 - 1/(2q)``, the critical Hurst index for rank ``q``."""
    return 1.0 - 1.0 / (2 * _check_rank(q))


def mu(H: float, /) -> float:
    """``μ_H = 2 / Γ(2H+1)``; the stationary FOUP variance is ``γ^{-2H} / μ_H``."""
    return 2.0 / math.gamma(2 * check_hurst(H) + 1)


def g(H: float, time: float, /) -> float:
    """Time norming of the quadratic functional, three branches split at 3/4."""
    H = check_hurst(H)
    if time <= 1.0:
        msg = f"g_H(t) is defined for t > 1, got {time}"
        raise DomainError(msg)
    if H < 0.75:
        return time**-0.5
    if H == 0.75:
        return (time * math.log(time)) ** -0.5
    return time ** (1.0 - 2 * H)


def h(H: float, gamma: float, /) -> float:
    H = check_hurst(H)
    gamma = _check_rate(gamma)
    if H < 0.75:
        return gamma ** (-0.5 - 2 * H)
    return gamma**-2.0


def xi_integral_beta(H: float, /) -> float:
    """``½ Γ((3-4H)/2) Γ((1+4H)/2)``, the closed form of :func:`xi_integral`."""
    return 0.5 * math.gamma((3 - 4 * H) / 2) * math.gamma((1 + 4 * H) / 2)


@memoize(maxsize=256)
def xi_integral(H: float, /) -> float:
    """``J(H) = ∫_0^∞ ξ^{2-4H} / (1+ξ²)² dξ`` by quadrature.

    The half line is folded onto ``[0, 1]`` with ``ξ -> 1/ξ``, leaving
    ``∫_0^1 (x^{2-4H} + x^{4H}) / (1+x²)² dx``; the algebraic endpoint
    singularity of the first term is handled by an ``alg`` weight.

    Raises
    ------
    DivergentIntegral
        For ``H >= 3/4``, where the integrand is not integrable at zero.
    """
    H = check_hurst(H)
    if H >= 0.75:
        msg = f"∫ ξ^(2-4H)/(1+ξ²)² diverges at 0 for H >= 3/4, got H={H}"
        raise DivergentIntegral(msg)
    near = quad(
        lambda x: 1.0 / (1.0 + x * x) ** 2, 0.0, 1.0,
        weight="alg", wvar=(2 - 4 * H, 0.0), what="J(H) near zero",
    )
    far = quad(
        lambda x: x ** (4 * H) / (1.0 + x * x) ** 2, 0.0, 1.0, what="J(H) at infinity"
    )
    return near + far


def sigma(H: float, /) -> float:
    """``σ_H``. No continuity is assumed at the 3/4 split."""
    H = check_hurst(H)
    if H < 0.75:
        return (
            math.sqrt(2 / math.pi)
            * math.gamma(2 * H + 1)
            * math.sin(math.pi * H)
            * math.sqrt(xi_integral(H))
        )
    if H == 0.75:
        return 0.75
    return H * math.sqrt((4 * H - 2) / (4 * H - 3))


def kappa(H: float, /) -> float:
    H = check_hurst(H)
    if H < 0.75:
        return (
            math.sin(math.pi * H)
            * math.sqrt(math.gamma(2 * H + 1) * xi_integral(H) / math.pi)
        )
    if H == 0.75:
        return math.sqrt(3 / 8) * math.pi**-0.25
    return math.sqrt(H / (4 * H - 3) / 2 / math.gamma(2 * H - 1))


def scaling_matrix_31(H: float, gamma: float, /) -> t.FloatArray:
    """``D_H(γ)``, the 4×4 diagonal rescaling of ``τ_H(γ) - b_H(γ)``.

    Raises
    ------
    DomainError
        For ``γ <= 1``.
    """
    H = check_hurst(H)
    if not gamma > 1.0:
        msg = f"D_H(γ) needs γ > 1, got {gamma}"
        raise DomainError(msg)
    if H < 0.75:
        diag = [gamma ** (0.5 - H), gamma ** (0.5 - 2 * H), gamma ** (H - 0.5), 1.0]
    elif H == 0.75:
        root_log = math.sqrt(math.log(gamma))
        diag = [
            gamma**-0.25 / root_log,
            gamma**-1.0 / root_log,
            gamma**0.25 / root_log,
            1.0,
        ]
    else:
        diag = [gamma ** (2 - 3 * H), gamma ** (2 - 4 * H), gamma ** (1 - H), 1.0]
    return np.diag(diag)


def sigma_matrix_31(H: float, /) -> t.FloatArray:
    k, m = kappa(H), mu(H)
    return np.array(
        [[-k * m, 0.0], [-2 * k * m**1.5, 0.0], [k, 0.0], [0.0, 0.5]], dtype=np.float64
    )


def b_vec_31(H: float, gamma: float, /) -> t.FloatArray:
    gamma = _check_rate(gamma)
    m = mu(H)
    return np.array(
        [m**0.5 * gamma**H, m * gamma ** (2 * H), m**-0.5 * gamma ** (1 - H), gamma],
        dtype=np.float64,
    )


def bracket(H: float, u: float, /) -> float:
    """``b(u)`` for ``u >= 0``, overflow free.

    ``e^u ∫_u^∞ e^{-s} s^{2H-1} ds`` is an upper incomplete gamma for small
    ``u`` and ``∫_0^∞ e^{-v} (u+v)^{2H-1} dv`` otherwise;
    ``e^{-u} ∫_0^u e^s s^{2H-1} ds = ∫_0^u e^{-v} (u-v)^{2H-1} dv``.
    """
    u = abs(float(u))
    a = 2 * H
    gam = math.gamma(a + 1)
    if u == 0.0:
        return 2.0 * gam
    if u < 1.0:
        upper = math.gamma(a) * float(special.gammaincc(a, u)) * math.exp(u)
    else:
        upper = quad(
            lambda v: math.exp(-v) * (u + v) ** (a - 1), 0.0, math.inf,
            what="upper bracket term",
        )
    if u <= _Q_SWITCH:
        lower = quad(
            lambda v: math.exp(-v), 0.0, u, weight="alg", wvar=(0.0, a - 1),
            what="lower bracket term",
        )
    else:
        # the part past _Q_SWITCH carries a factor e^{-40}
        lower = quad(
            lambda v: math.exp(-v) * (u - v) ** (a - 1), 0.0, _Q_SWITCH,
            what="lower bracket term",
        )
    return gam * math.exp(-u) + a * (upper - lower)


def _bracket_tail(q: int, H: float, horizon: float) -> float:
    # b(u) ~ a0 u^{e0} (1 + (2H-2)(2H-3) u^{-2}) as u -> ∞
    a0 = 4 * H * (2 * H - 1)
    e0 = 2 * H - 2
    ratio = (2 * H - 2) * (2 * H - 3)
    lead = q * e0 + 1
    nxt = q * e0 - 1
    return a0**q * (horizon**lead / -lead + q * ratio * horizon**nxt / -nxt)


def _in_weak_region(q: int, H: float) -> bool:
    if q == 1:
        return H <= 0.5
    return H < boundary_hurst(q)


@memoize(maxsize=256)
def I_qH(q: int, H: float, /) -> float:
    """``I_{q,H} = ∫_0^∞ b(u)^q du``.

    The integral over ``[0, 200]`` is numeric; the remainder is the
    integrated two-term asymptotic expansion of ``b^q``.

    Raises
    ------
    DomainError
        Outside ``q = 1, H <= 1/2`` or ``q >= 2, H < 1 - 1/(2q)``.
    """
    q = _check_rank(q)
    H = check_hurst(H)
    if not _in_weak_region(q, H):
        msg = f"I_(q,H) diverges for q={q}, H={H}"
        raise DomainError(msg)
    pieces = [
        quad(lambda u: bracket(H, u) ** q, lo, hi, what=f"I_({q},{H}) body")
        for lo, hi in zip(_I_QH_BREAKS, _I_QH_BREAKS[1:], strict=False)
    ]
    value = math.fsum(pieces) + _bracket_tail(q, H, _I_QH_HORIZON)
    if q >= 2 and value <= 0.0:
        log.warning("I_(%d,%g) = %.3g is not positive", q, H, value)
    return value


def weak_variance_closed(q: int, H: float, gamma: float, /) -> float:
    """``2 q! I_{q,H} / (γ [2Γ(2H+1)]^q)``, the weak-regime limit variance."""
    gamma = _check_rate(gamma)
    return (
        2 * math.factorial(q) * I_qH(q, H) / (gamma * (2 * math.gamma(2 * H + 1)) ** q)
    )


def nclt_coeff(q: int, H: float, gamma: float, /) -> float:
    q = _check_rank(q)
    H = check_hurst(H)
    gamma = _check_rate(gamma)
    if not H > boundary_hurst(q):
        msg = f"Non-central scaling needs H > {boundary_hurst(q):g} for q={q}"
        raise DomainError(msg)
    a = (2 * H - 2) * q
    return (
        math.sqrt(2 * math.factorial(q))
        * (a + 1)
        * (a + 2) ** -0.5
        * ((2 * H - 1) / math.gamma(2 * H)) ** (q / 2)
        * gamma ** (q * (H - 1))
    )


def boundary_coeff(q: int, H: float, gamma: float, /) -> float:
    q = _check_rank(q)
    H = check_hurst(H)
    gamma = _check_rate(gamma)
    if q < 2 or H != boundary_hurst(q):
        msg = f"Boundary scaling needs q >= 2 and H = 1 - 1/(2q), got q={q}, H={H}"
        raise DomainError(msg)
    return (
        math.sqrt(2 * math.factorial(q))
        * ((2 * H - 1) / math.gamma(2 * H)) ** (q / 2)
        * gamma ** (q * (H - 1))
    )


class RegimeTag(enum.StrEnum):
    WEAK = "Weak"
    BOUNDARY = "Boundary"
    STRONG = "Strong"


@dataclass(frozen=True, slots=True)
class Regime:
    tag: RegimeTag
    q: int
    H: float


def regime(q: int, H: float, /) -> Regime:
    """Classify ``(q, H)``; the boundary is matched by exact float equality."""
    q = _check_rank(q)
    H = check_hurst(H)
    if _in_weak_region(q, H):
        tag = RegimeTag.WEAK
    elif q >= 2 and H == boundary_hurst(q):
        tag = RegimeTag.BOUNDARY
    else:
        tag = RegimeTag.STRONG
    return Regime(tag, q, H)


def quadratic_centering(H: float, gamma: float, /) -> float:
    """``Γ(2H+1) / (2γ^{2H})``, the stationary second moment of the FOUP."""
    gamma = _check_rate(gamma)
    return math.gamma(2 * check_hurst(H) + 1) / (2 * gamma ** (2 * H))


def explosive_target(H: float, /) -> t.FloatArray:
    """Scale of the γ -> -∞ limit of the rescaled ``τ_H(γ)``."""
    gam = math.gamma(2 * check_hurst(H) + 1)
    return np.array([2 / math.sqrt(gam), 4 / gam, math.sqrt(gam), 2.0])


def smoothing_bound(
    time: float, gamma: float, C: float = 1.0, beta: float = 1.0
) -> float:
    """Sup-error bound of ``t ∫_0^v e^{γt(s-v)} ψ(s) ds`` against ``ψ(v)/γ``.

    ``ψ`` is Hölder of order ``beta`` with constant ``C``; the supremum of
    ``s^β e^{-s}`` is ``(β/e)^β``.
    """
    gamma = _check_rate(gamma)
    peak = (beta / math.e) ** beta
    return time**-beta * C / gamma ** (1 + beta) * (math.gamma(beta + 1) + peak)


@dataclass(frozen=True, slots=True)
class NormalizationBundle:
    """Every constant available for ``(q, H, γ)``.

    Entries that are undefined for the arguments (``I_qH`` outside the weak
    region, ``D`` for ``γ <= 1``, anything γ-dependent without γ) are ``None``.
    """

    H: float
    q: int
    gamma: float | None
    regime: RegimeTag
    mu: float
    sigma: float
    kappa: float
    Sigma_mat: t.FloatArray
    h: float | None = None
    D: t.FloatArray | None = None
    b: t.FloatArray | None = None
    I_qH: float | None = None
    weak_variance: float | None = None
    nclt_coeff: float | None = None
    boundary_coeff: float | None = None
    centering: float | None = None

    def g(self, time: float, /) -> float:
        return g(self.H, time)

    def to_dict(self) -> dict[str, t.Any]:
        out: dict[str, t.Any] = {}
        for f in fields(self):
            name, value = f.name, getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, np.ndarray):
                value = value.tolist()
            elif isinstance(value, RegimeTag):
                value = str(value)
            out[name] = value
        return out


def normalization_bundle(
    q: int, H: float, gamma: float | None = None
) -> NormalizationBundle:
    q = _check_rank(q)
    H = check_hurst(H)
    tag = regime(q, H).tag
    kwargs: dict[str, t.Any] = {}
    if tag is RegimeTag.WEAK:
        kwargs["I_qH"] = I_qH(q, H)
    if gamma is not None:
        gamma = _check_rate(gamma)
        kwargs["h"] = h(H, gamma)
        kwargs["b"] = b_vec_31(H, gamma)
        kwargs["centering"] = quadratic_centering(H, gamma)
        if gamma > 1.0:
            kwargs["D"] = scaling_matrix_31(H, gamma)
        if tag is RegimeTag.WEAK:
            kwargs["weak_variance"] = weak_variance_closed(q, H, gamma)
        elif tag is RegimeTag.BOUNDARY:
            kwargs["boundary_coeff"] = boundary_coeff(q, H, gamma)
        else:
            kwargs["nclt_coeff"] = nclt_coeff(q, H, gamma)
    return NormalizationBundle(
        H=H,
        q=q,
        gamma=gamma,
        regime=tag,
        mu=mu(H),
        sigma=sigma(H),
        kappa=kappa(H),
        Sigma_mat=sigma_matrix_31(H),
        **kwargs,
    )
