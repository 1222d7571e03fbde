"""Hot decision kernels: compiled extension when built, pure Python otherwise.

Set ``INFOGOV_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from infogov.kernels import _table_py

if os.environ.get("INFOGOV_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from infogov.kernels import _table as _compiled
    except ImportError:
        _compiled = None

if _compiled is not None:
    table_step = _compiled.table_step
    BACKEND = "cython"
else:
    table_step = _table_py.table_step
    BACKEND = "python"

table_step_python = _table_py.table_step
table_step_compiled = None if _compiled is None else _compiled.table_step

__all__ = ["BACKEND", "table_step", "table_step_compiled", "table_step_python"]
