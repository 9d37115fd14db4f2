"""Pick the compiled kernels when available, the pure-Python ones otherwise.

Set ``MAXPERS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("MAXPERS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"
expand_cliques = _impl.expand_cliques
reduce_twist = _impl.reduce_twist
locate_rows = _impl.locate_rows
antitranspose = _impl.antitranspose
