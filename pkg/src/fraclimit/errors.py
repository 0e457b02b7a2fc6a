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

"""Exceptions raised by fraclimit.

Every error derives from :class:`FracLimitError`, so callers (the CLI in
particular) can tell a domain failure from a bug.
"""

from __future__ import annotations

__all__ = (
    "BurnInTooShort",
    "DegeneratePath",
    "DegenerateSeries",
    "DivergentIntegral",
    "DomainError",
    "EmbeddingFailed",
    "EmptySample",
    "FracLimitError",
    "GridTooShort",
    "MeanNotZero",
    "NotPSD",
    "Overflow",
    "QuadratureFailed",
    "RankUndetected",
    "TooLarge",
    "ValidationError",
    "WrongRegime",
)


class FracLimitError(Exception):
    pass


class ValidationError(FracLimitError, ValueError):
    """A user supplied value violates an operation's preconditions."""


class DomainError(FracLimitError, ValueError):
    """An argument lies outside the domain of a closed-form expression."""


class MeanNotZero(FracLimitError):
    pass


class RankUndetected(FracLimitError):
    """No Hermite coefficient exceeds the rank tolerance."""


class DivergentIntegral(FracLimitError):
    pass


class QuadratureFailed(FracLimitError):
    pass


class TooLarge(FracLimitError):
    """Diagram enumeration would exceed the vertex limit."""


class NotPSD(FracLimitError):
    pass


class EmbeddingFailed(FracLimitError):
    """Neither circulant embedding nor the dense fallback can sample the grid."""


class Overflow(FracLimitError, OverflowError):
    """An explosive (negative rate) path would leave the float64 exponent range."""


class WrongRegime(FracLimitError):
    pass


class GridTooShort(FracLimitError):
    pass


class EmptySample(FracLimitError):
    pass


class DegenerateSeries(FracLimitError):
    pass


class DegeneratePath(FracLimitError):
    pass


class BurnInTooShort(UserWarning):
    """The discarded initial condition still weighs more than 1e-4."""
