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


from __future__ import annotations

import logging
from collections.abc import Callable

from scipy import integrate

from . import _typings as t
from .errors import QuadratureFailed

__all__ = ["EPSABS", "EPSREL", "quad"]

log = logging.getLogger(__name__)

EPSABS = 1e-12
EPSREL = 1e-10


def quad(
    fn: Callable[[float], float],
    a: float,
    b: float,
    /,
    *,
    what: str,
    tol: float = 1e-7,
    epsabs: float = EPSABS,
    epsrel: float = EPSREL,
    limit: int = 200,
    **kwargs: t.Any,
) -> float:
    """``scipy.integrate.quad`` that raises instead of warning.

    QUADPACK flags (roundoff, subdivision limit) are tolerated as long as the
    reported error stays below ``tol`` relative to ``max(1, |value|)``.
    ``what`` names the integral in the error message.
    """
    res = integrate.quad(
        fn, a, b, full_output=1, epsabs=epsabs, epsrel=epsrel, limit=limit, **kwargs
    )
    value, abserr = float(res[0]), float(res[1])
    if len(res) > 3:
        if abserr > tol * max(1.0, abs(value)):
            msg = f"{what} on [{a:g}, {b:g}] did not converge: {res[3]} (error {abserr:.3g})"
            raise QuadratureFailed(msg)
        log.debug("%s on [%g, %g]: %s, error %.3g accepted", what, a, b, res[3], abserr)
    return value
