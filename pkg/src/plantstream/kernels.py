"""Kernel backend selection: the compiled extension when importable, else pure Python.

Set ``PLANTSTREAM_PURE=1`` to force the fallback.
"""

import os

from . import _fallback

if os.environ.get("PLANTSTREAM_PURE"):
    _impl, BACKEND = _fallback, "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl, BACKEND = _fallback, "python"

max_biclique = _impl.max_biclique
densest_subset = _impl.densest_subset
sampled_densest = _impl.sampled_densest
