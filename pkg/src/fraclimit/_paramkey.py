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

"""Cache keys for functions of model parameters.

Parameters arrive as python floats, numpy scalars or ints depending on the
caller. Keys are built from normalized values so ``foup_cov(0.75, 1, 2)``
and ``foup_cov(np.float64(0.75), 1.0, 2.0)`` hit the same entry, and
keyword order doesn't matter.
"""

from __future__ import annotations

import numbers
from collections.abc import Hashable

from . import _typings as t

__all__ = ["make_key"]


class _ParamKey:
    __slots__ = ("_hash", "_values")

    def __init__(self, values: tuple[t.Any, ...]) -> None:
        self._values = values
        self._hash = hash(values)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, _ParamKey):
            return NotImplemented
        return self._values == other._values

    def __repr__(self) -> str:
        return f"_ParamKey{self._values!r}"


_KW_MARK: tuple[object] = (object(),)


def _norm(value: t.Any) -> t.Any:
    if isinstance(value, bool | str):
        return value
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        return float(value)
    return value


def make_key(args: tuple[t.Any, ...], kwds: dict[str, t.Any]) -> Hashable:
    """Build a hashable key; single int, float or str arguments are their own key."""
    values = tuple(map(_norm, args))
    if kwds:
        values += _KW_MARK
        values += tuple((k, _norm(kwds[k])) for k in sorted(kwds))
    elif len(values) == 1 and type(values[0]) in {int, float, str}:
        return values[0]
    return _ParamKey(values)
