"""Hot kernels with a compiled implementation and a pure-Python fallback.

The compiled extension is used when it was built; set ``CTXKIT_PURE_PYTHON=1``
to force the fallback.  :func:`use_backend` switches at runtime (benchmarks
and cross-checking tests use it).
"""

import os

from . import purepy

try:
    if os.environ.get("CTXKIT_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import fast as _fast
except ImportError:
    _fast = None

BACKENDS = {"python": purepy}
if _fast is not None:
    BACKENDS["cython"] = _fast

BACKEND = "cython" if _fast is not None else "python"
rref = BACKENDS[BACKEND].rref
search_family = purepy.search_family


def use_backend(name):
    """Select the GF(2) elimination backend; returns the previous name."""
    global BACKEND, rref
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    previous = BACKEND
    BACKEND = name
    rref = BACKENDS[name].rref
    return previous


def available_backends():
    return sorted(BACKENDS)
