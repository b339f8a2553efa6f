"""Hot kernels, compiled when available.

The Cython extension is preferred; the numpy implementation is used when the
extension is not built or when ``LGME_PURE_PYTHON=1`` is set.
"""

import os

from . import _pykernels

if os.environ.get("LGME_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
fmsv_support = _impl.fmsv_support
top_singular_sq = _impl.top_singular_sq

__all__ = ["BACKEND", "fmsv_support", "top_singular_sq", "_pykernels"]
