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

"""Shim for typing- and annotation-related symbols.

Import the module, not the names (``from . import _typings as t``) and keep
``from __future__ import annotations`` at the top of the importing module.
Attribute access is what defers importing ``typing`` and ``numpy.typing``
until something actually evaluates an annotation.
"""

from __future__ import annotations

TYPE_CHECKING = False

if TYPE_CHECKING:
    from typing import Any, Literal, Never, Self

    import numpy as np
    import numpy.typing as npt

    type FloatArray = npt.NDArray[np.float64]
else:

    def __getattr__(name: str):
        if name in {"Any", "Literal", "Never", "Self"}:
            import typing

            return getattr(typing, name)

        if name == "FloatArray":
            import numpy as np
            import numpy.typing as npt

            return npt.NDArray[np.float64]

        msg = f"module {__name__!r} has no attribute {name!r}"
        raise AttributeError(msg)


__all__ = ["Any", "FloatArray", "Literal", "Never", "Self"]
