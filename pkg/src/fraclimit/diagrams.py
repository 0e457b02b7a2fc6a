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

"""Diagrams and the diagram formula for ``E ∏_j H_q(X_j)``.

A diagram with ``p`` levels of ``q`` vertices is a perfect matching in which
no edge stays inside a level. The formula sums, over all such diagrams, the
product of ``ρ_{m(e), M(e)}`` along the edges.
"""

from __future__ import annotations

import math
from collections.abc import Generator, Sequence
from dataclasses import dataclass
from functools import cache
from typing import NamedTuple

import numpy as np

from . import _typings as t
from .errors import NotPSD, TooLarge, ValidationError
from .hermite import hermite_eval

__all__ = (
    "VERTEX_LIMIT",
    "CorrelationMatrix",
    "Diagram",
    "Edge",
    "MomentEstimate",
    "diagram_moment",
    "enumerate_diagrams",
    "mc_moment_oracle",
)

VERTEX_LIMIT = 16
_PSD_TOL = 1e-10
_SYM_TOL = 1e-12

type Vertex = tuple[int, int]


class Edge(NamedTuple):
    """An edge stored low level first, so ``m(e)`` and ``M(e)`` are the levels."""

    low: Vertex
    high: Vertex

    @property
    def m(self) -> int:
        return self.low[0]

    @property
    def M(self) -> int:
        return self.high[0]


@dataclass(frozen=True, slots=True)
class Diagram:
    levels: int
    row_length: int
    edges: tuple[Edge, ...]

    @property
    def vertices(self) -> frozenset[Vertex]:
        return frozenset(v for e in self.edges for v in e)

    def weight(self, corr: CorrelationMatrix, /) -> float:
        """``∏_e ρ_{m(e), M(e)}``, levels being 1-based."""
        rho = corr.values
        return math.prod(float(rho[e.m - 1, e.M - 1]) for e in self.edges)


@dataclass(frozen=True, slots=True)
class CorrelationMatrix:
    """A validated correlation matrix. Build with :meth:`of`."""

    values: t.FloatArray

    @classmethod
    def of(cls, values: t.Any, /) -> CorrelationMatrix:
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            msg = f"Correlation matrix must be square, got shape {arr.shape}"
            raise ValidationError(msg)
        if not np.allclose(arr, arr.T, rtol=0.0, atol=_SYM_TOL):
            msg = "Correlation matrix is not symmetric"
            raise ValidationError(msg)
        if not np.allclose(np.diag(arr), 1.0, rtol=0.0, atol=_SYM_TOL):
            msg = "Correlation matrix needs a unit diagonal"
            raise ValidationError(msg)
        if np.any(np.abs(arr) > 1.0 + _SYM_TOL):
            msg = "Correlations must lie in [-1, 1]"
            raise ValidationError(msg)
        smallest = float(np.linalg.eigvalsh(arr)[0])
        if smallest < -_PSD_TOL:
            msg = f"Correlation matrix is not PSD (min eigenvalue {smallest:.3g})"
            raise NotPSD(msg)
        arr.setflags(write=False)
        return cls(arr)

    @classmethod
    def equicorrelated(cls, p: int, rho: float, /) -> CorrelationMatrix:
        arr = np.full((p, p), rho, dtype=np.float64)
        np.fill_diagonal(arr, 1.0)
        return cls.of(arr)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def permuted(self, order: Sequence[int], /) -> CorrelationMatrix:
        idx = np.asarray(order)
        return CorrelationMatrix.of(self.values[np.ix_(idx, idx)])

    def sqrt(self) -> t.FloatArray:
        """Symmetric square root ``V diag(λ^{1/2}) V'``."""
        lam, vec = np.linalg.eigh(self.values)
        return (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.T


def _check_size(p: int, q: int, limit: int) -> None:
    if p < 2 or q < 1:
        msg = f"Diagrams need p >= 2 levels and rows of q >= 1, got p={p}, q={q}"
        raise ValidationError(msg)
    if p * q > limit:
        msg = f"D({p},{q}) has {p * q} vertices, over the limit of {limit}"
        raise TooLarge(msg)


def _matchings(
    free: tuple[Vertex, ...], acc: tuple[Edge, ...]
) -> Generator[tuple[Edge, ...], None, None]:
    if not free:
        yield acc
        return
    head, rest = free[0], free[1:]
    for i, other in enumerate(rest):
        if other[0] == head[0]:
            continue
        yield from _matchings(rest[:i] + rest[i + 1 :], (*acc, Edge(head, other)))


def enumerate_diagrams(
    p: int, q: int, /, *, limit: int = VERTEX_LIMIT
) -> tuple[Diagram, ...]:
    """All diagrams in ``D(p, q)``, in a deterministic order.

    The lowest unmatched vertex is matched to every admissible partner in turn.
    An odd vertex count gives the empty set.

    Raises
    ------
    TooLarge
        If ``p * q`` exceeds ``limit``.
    """
    _check_size(p, q, limit)
    if (p * q) % 2:
        return ()
    vertices = tuple((lvl, pos) for lvl in range(1, p + 1) for pos in range(1, q + 1))
    return tuple(Diagram(p, q, edges) for edges in _matchings(vertices, ()))


def _as_corr(sigma: CorrelationMatrix | t.Any, p: int) -> CorrelationMatrix:
    corr = sigma if isinstance(sigma, CorrelationMatrix) else CorrelationMatrix.of(sigma)
    if corr.size != p:
        msg = f"Correlation matrix has size {corr.size}, expected {p}"
        raise ValidationError(msg)
    return corr


def diagram_moment(
    p: int, q: int, sigma: CorrelationMatrix | t.Any, /, *, limit: int = VERTEX_LIMIT
) -> float:
    """Evaluate ``Σ_{D ∈ D(p,q)} ∏_{e ∈ D} ρ_{m(e), M(e)}``.

    Vertices within a level are exchangeable, so the sum runs over the
    remaining-count profile instead of individual matchings: the lowest level
    with a free vertex pairs it with any of the free vertices of each other
    level. The value equals the explicit sum over :func:`enumerate_diagrams`.
    """
    _check_size(p, q, limit)
    corr = _as_corr(sigma, p)
    if (p * q) % 2:
        return 0.0
    rho = corr.values.tolist()

    @cache
    def remaining(counts: tuple[int, ...]) -> float:
        first = next((i for i, c in enumerate(counts) if c), None)
        if first is None:
            return 1.0
        total = 0.0
        for j in range(first + 1, p):
            if not counts[j] or not rho[first][j]:
                continue
            nxt = list(counts)
            nxt[first] -= 1
            nxt[j] -= 1
            total += counts[j] * rho[first][j] * remaining(tuple(nxt))
        return total

    return remaining((q,) * p)


class MomentEstimate(NamedTuple):
    estimate: float
    stderr: float


def mc_moment_oracle(
    p: int,
    q: int,
    sigma: CorrelationMatrix | t.Any,
    /,
    n_samples: int = 100_000,
    seed: int | np.random.SeedSequence = 0,
) -> MomentEstimate:
    """Monte Carlo estimate of ``E ∏_j H_q(X_j)`` for ``X ~ N(0, Σ)``.

    Raises
    ------
    NotPSD
        If ``sigma`` is not positive semidefinite.
    """
    if n_samples < 1000:
        msg = f"n_samples must be at least 1000, got {n_samples}"
        raise ValidationError(msg)
    corr = _as_corr(sigma, p)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_samples, p)) @ corr.sqrt()
    prods = np.prod(hermite_eval(q, x), axis=1)
    return MomentEstimate(
        float(np.mean(prods)), float(np.std(prods, ddof=1) / math.sqrt(n_samples))
    )
