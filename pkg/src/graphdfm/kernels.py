"""Backend selection for the sampling kernels.

The compiled extension is used when it was built and ``GRAPHDFM_PURE_PYTHON``
is unset; otherwise the NumPy implementation is used. Both expose
``rate_table``, ``expected_rates`` and ``categorical``.
"""
from __future__ import annotations

import os

from . import _kernels_py as py

DB_DESIGNS = py.DB_DESIGNS

compiled = None
if not os.environ.get("GRAPHDFM_PURE_PYTHON"):
    try:
        from . import _kernels as compiled  # type: ignore[no-redef]
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else py
BACKEND = "cython" if compiled is not None else "python"

rate_table = _impl.rate_table
expected_rates = _impl.expected_rates
categorical = _impl.categorical
