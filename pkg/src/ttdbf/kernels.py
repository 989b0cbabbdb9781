"""Pick the TTD search backend at import time.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``TTDBF_PURE_PYTHON`` is set to a non-empty value, the
numpy implementation is used. Both expose the same functions.
"""

import os

from . import _search

BACKEND = "python"
_impl = _search

if not os.environ.get("TTDBF_PURE_PYTHON"):
    try:
        from . import _search_ext as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _search

coordinate_descent = _impl.coordinate_descent
chain_optimum = _impl.chain_optimum
delay_objective = _impl.delay_objective
WIRING_CODES = _search.WIRING_CODES
