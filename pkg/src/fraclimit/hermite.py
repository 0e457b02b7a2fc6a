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

"""Hermite polynomials and L²(ν) expansions of functionals of a standard normal.

Polynomials are the probabilists' ones (leading coefficient one), so
``E H_j(N) H_k(N) = δ_jk k!`` for ``N ~ N(0, 1)``. Expectations against the
standard normal law are Gauss-Hermite sums with ``GH_ORDER`` nodes, exact for
polynomial integrands up to degree ``2 * GH_ORDER - 1``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import hermite_e

from . import _typings as t
from ._quad import quad
from .errors import DivergentIntegral, MeanNotZero, RankUndetected, ValidationError
from .lru import memoize

__all__ = (
    "DEFAULT_CUTOFF",
    "DEFAULT_TRUNCATION",
    "GH_ORDER",
    "MEAN_TOL",
    "RANK_TOL",
    "Functional",
    "HermiteExpansion",
    "WeakVariance",
    "expand",
    "gauss_hermite",
    "hermite_eval",
    "hermite_functional",
    "hermite_rank",
    "hermite_table",
    "sigma_weak_sq",
)

log = logging.getLogger(__name__)

GH_ORDER = 128
DEFAULT_TRUNCATION = 12
RANK_TOL = 1e-9
MEAN_TOL = 1e-8
DEFAULT_CUTOFF = 200.0

# below this the tail of ∫|r|^q is treated as non-integrable
_DIVERGENCE_MARGIN = 1.01


@memoize(maxsize=16)
def gauss_hermite(order: int = GH_ORDER, /) -> tuple[t.FloatArray, t.FloatArray]:
    """Nodes and weights for expectations against the standard normal law.

    The weights sum to one. Both arrays are shared between callers and are
    returned read-only.
    """
    nodes, weights = hermite_e.hermegauss(order)
    weights = weights / math.sqrt(2 * math.pi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def hermite_table(k_max: int, x: t.FloatArray, /) -> t.FloatArray:
    """Rows ``H_0(x) .. H_{k_max}(x)`` by the three-term recurrence."""
    out = np.empty((k_max + 1, *x.shape), dtype=np.float64)
    out[0] = 1.0
    if k_max >= 1:
        out[1] = x
    for k in range(1, k_max):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


def hermite_eval(k: int, x: float | t.FloatArray, /) -> t.Any:
    """Evaluate ``H_k`` at ``x``.

    Parameters
    ----------
    k: int
        Degree, ``k >= 0``.
    x: float | ndarray
        Evaluation point(s).

    Returns
    -------
    float | ndarray
        A float for scalar input, otherwise an array of ``x``'s shape.

    Raises
    ------
    ValidationError
        If ``k`` is negative.
    """
    if k < 0:
        msg = f"Hermite degree must be non-negative, got {k}"
        raise ValidationError(msg)
    arr = np.asarray(x, dtype=np.float64)
    prev = np.ones_like(arr)
    cur = arr.copy() if k else prev
    for j in range(1, k):
        prev, cur = cur, arr * cur - j * prev
    if cur.ndim == 0:
        return float(cur)
    return cur


@dataclass(frozen=True, slots=True)
class Functional:
    """A vectorized real map ``f`` with its moments under ``N(0, 1)``.

    ``eval`` must accept and return float arrays. ``mean`` and
    ``second_moment`` are the quadrature estimates of ``Ef(N)`` and
    ``Ef(N)²`` and act as the certificate that ``f`` is a valid input for
    :func:`expand`.
    """

    eval: Callable[[t.FloatArray], t.FloatArray]
    mean: float
    second_moment: float
    name: str = "f"

    @classmethod
    def of(
        cls,
        fn: Callable[[t.FloatArray], t.FloatArray],
        /,
        *,
        name: str | None = None,
        quad_order: int = GH_ORDER,
    ) -> Functional:
        nodes, weights = gauss_hermite(quad_order)
        values = np.asarray(fn(np.array(nodes)), dtype=np.float64)
        mean = math.fsum(weights * values)
        second = math.fsum(weights * values * values)
        if not math.isfinite(second):
            msg = f"E f² is not finite for {name or getattr(fn, '__name__', 'f')}"
            raise ValidationError(msg)
        return cls(fn, mean, second, name or getattr(fn, "__name__", "f"))

    def __call__(self, x: t.FloatArray, /) -> t.FloatArray:
        return self.eval(x)

    def is_centered(self, tol: float = MEAN_TOL) -> bool:
        return abs(self.mean) <= tol * max(1.0, math.sqrt(self.second_moment))


def hermite_functional(q: int, /) -> Functional:
    """``H_q`` as a :class:`Functional`; its moments are exact."""
    if q < 1:
        msg = f"H_q is mean zero only for q >= 1, got {q}"
        raise ValidationError(msg)

    def h_q(x: t.FloatArray) -> t.FloatArray:
        return hermite_eval(q, x)

    return Functional(h_q, 0.0, float(math.factorial(q)), f"H_{q}")


@dataclass(frozen=True, slots=True)
class HermiteExpansion:
    """Truncated expansion ``f = Σ_{k>=1} c_k / k! H_k``.

    Attributes
    ----------
    coeffs:
        ``c_1 .. c_K`` with ``c_k = E[H_k(N) f(N)]``.
    second_moment:
        ``Ef²`` of the source functional.
    rank:
        Hermite rank under :data:`RANK_TOL`, ``None`` when every coefficient
        is below tolerance.
    """

    coeffs: tuple[float, ...]
    second_moment: float
    rank: int | None
    name: str = "f"

    @classmethod
    def from_coeffs(
        cls,
        coeffs: Sequence[float],
        /,
        *,
        second_moment: float | None = None,
        name: str = "f",
    ) -> HermiteExpansion:
        """Build an expansion directly; ``Ef²`` defaults to the Parseval sum."""
        cs = tuple(float(c) for c in coeffs)
        if not cs:
            msg = "An expansion needs at least one coefficient"
            raise ValidationError(msg)
        if second_moment is None:
            second_moment = _parseval(cs)
        return cls(cs, second_moment, _find_rank(cs, second_moment, RANK_TOL), name)

    @property
    def truncation(self) -> int:
        return len(self.coeffs)

    def coeff(self, k: int, /) -> float:
        """``c_k`` for ``k >= 1``; zero past the truncation."""
        if k < 1:
            msg = f"Coefficients are indexed from 1, got {k}"
            raise ValidationError(msg)
        return self.coeffs[k - 1] if k <= len(self.coeffs) else 0.0

    @property
    def parseval(self) -> float:
        return _parseval(self.coeffs)

    @property
    def tail(self) -> float:
        """Truncation loss ``Ef² - Σ_{k<=K} c_k² / k!``."""
        return self.second_moment - self.parseval

    def __call__(self, x: float | t.FloatArray, /) -> t.Any:
        arr = np.asarray(x, dtype=np.float64)
        table = hermite_table(len(self.coeffs), arr)
        scale = np.array(
            [c / math.factorial(k) for k, c in enumerate(self.coeffs, start=1)]
        )
        out = np.tensordot(scale, table[1:], axes=1)
        if out.ndim == 0:
            return float(out)
        return out


def _parseval(coeffs: Sequence[float]) -> float:
    return math.fsum(c * c / math.factorial(k) for k, c in enumerate(coeffs, start=1))


def _significant(c: float, k: int, second_moment: float, tol: float) -> bool:
    return abs(c) > tol * math.sqrt(math.factorial(k)) * math.sqrt(second_moment)


def _find_rank(coeffs: Sequence[float], second_moment: float, tol: float) -> int | None:
    if second_moment <= 0.0:
        return None
    for k, c in enumerate(coeffs, start=1):
        if _significant(c, k, second_moment, tol):
            return k
    return None


def expand(
    f: Functional | Callable[[t.FloatArray], t.FloatArray],
    /,
    K: int = DEFAULT_TRUNCATION,
    quad_order: int = GH_ORDER,
) -> HermiteExpansion:
    """Hermite coefficients ``c_1 .. c_K`` of a mean-zero functional.

    Parameters
    ----------
    f:
        A :class:`Functional`, or a vectorized callable that gets wrapped in one.
    K: int
        Truncation, ``K >= 1``.
    quad_order: int
        Gauss-Hermite nodes; must exceed ``K``.

    Returns
    -------
    HermiteExpansion

    Raises
    ------
    MeanNotZero
        If ``|Ef|`` exceeds :data:`MEAN_TOL` (relative to ``(Ef²)^{1/2}`` when
        that is larger than one).
    RankUndetected
        If no coefficient up to ``K`` exceeds the rank tolerance.
    """
    if K < 1:
        msg = f"Truncation must be at least 1, got {K}"
        raise ValidationError(msg)
    if quad_order <= K:
        msg = f"quad_order={quad_order} cannot resolve degree {K} coefficients"
        raise ValidationError(msg)
    if not isinstance(f, Functional):
        f = Functional.of(f, quad_order=quad_order)
    if not f.is_centered():
        msg = f"E {f.name}(N) = {f.mean:.3g} is not zero"
        raise MeanNotZero(msg)

    nodes, weights = gauss_hermite(quad_order)
    values = np.asarray(f.eval(np.array(nodes)), dtype=np.float64)
    table = hermite_table(K, np.array(nodes))
    weighted = weights * values
    coeffs = tuple(math.fsum(table[k] * weighted) for k in range(1, K + 1))

    rank = _find_rank(coeffs, f.second_moment, RANK_TOL)
    if rank is None:
        msg = f"No Hermite coefficient of {f.name} up to K={K} exceeds tolerance"
        raise RankUndetected(msg)
    expansion = HermiteExpansion(coeffs, f.second_moment, rank, f.name)
    log.debug(
        "Expanded %s: rank=%d, truncation loss %.3g", f.name, rank, expansion.tail
    )
    return expansion


def hermite_rank(e: HermiteExpansion, /, tol: float = RANK_TOL) -> int:
    """Smallest ``k`` with ``|c_k| > tol · (k!)^{1/2} · (Ef²)^{1/2}``.

    Raises
    ------
    RankUndetected
        If no coefficient exceeds the tolerance.
    """
    rank = _find_rank(e.coeffs, e.second_moment, tol)
    if rank is None:
        msg = f"No coefficient of {e.name} exceeds tol={tol:g}"
        raise RankUndetected(msg)
    return rank


class WeakVariance(NamedTuple):
    """``value`` is the truncated sum; ``tail`` estimates the part past the cutoff."""

    value: float
    tail: float

    @property
    def corrected(self) -> float:
        return self.value + self.tail


def _tail_exponent(r: Callable[[float], float], cutoff: float) -> tuple[float, float]:
    # power-law fit through r(c/2), r(c): |r(u)| ~ |r(c)| (u/c)^{-alpha}
    near = abs(r(cutoff / 2))
    far = abs(r(cutoff))
    if far == 0.0 or near == 0.0:
        return 0.0, math.inf
    return far, math.log(near / far) / math.log(2.0)


def sigma_weak_sq(
    e: HermiteExpansion,
    r: Callable[[float], float],
    /,
    cutoff: float = DEFAULT_CUTOFF,
    *,
    quad_limit: int = 200,
    epsabs: float = 1e-12,
    epsrel: float = 1e-10,
) -> WeakVariance:
    """Asymptotic variance ``σ² = Σ_{k>=q} c_k² / k! ∫_ℝ r^k(u) du``.

    ``r`` is an even covariance function; each integral is taken as
    ``2 ∫_0^cutoff r^k`` and the remainder past the cutoff is extrapolated
    from a power-law fit to ``|r|`` on ``[cutoff/2, cutoff]``.

    Raises
    ------
    DivergentIntegral
        If the fitted decay makes ``∫ |r|^q`` non-integrable.
    QuadratureFailed
        If one of the truncated integrals does not converge.
    """
    if e.rank is None:
        return WeakVariance(0.0, 0.0)

    far, alpha = _tail_exponent(r, cutoff)
    q = e.rank
    if far and q * alpha <= _DIVERGENCE_MARGIN:
        msg = (
            f"∫|r|^{q} diverges: |r| decays like u^-{alpha:.3g} near u={cutoff:g}"
        )
        raise DivergentIntegral(msg)

    sign = math.copysign(1.0, r(cutoff))
    terms: list[float] = []
    tails: list[float] = []
    for k in range(q, len(e.coeffs) + 1):
        c = e.coeff(k)
        if not _significant(c, k, e.second_moment, RANK_TOL):
            continue
        weight = c * c / math.factorial(k)
        integral = quad(
            lambda u, k=k: r(u) ** k, 0.0, cutoff, what=f"∫ r^{k}",
            limit=quad_limit, epsabs=epsabs, epsrel=epsrel,
        )
        terms.append(2.0 * weight * integral)
        if far:
            tails.append(2.0 * weight * sign**k * far**k * cutoff / (k * alpha - 1.0))

    return WeakVariance(math.fsum(terms), math.fsum(tails))
