"""Hot simulation kernels, compiled when available.

The Cython extension ``secrecy_lab._kernels`` is used if it was built;
otherwise the numpy versions in ``secrecy_lab._fallback`` are used. Set
``SECRECY_LAB_PURE=1`` to force the fallback.
"""

import os

from . import _fallback as fallback

compiled = None
if not os.environ.get("SECRECY_LAB_PURE"):
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else fallback
BACKEND = "compiled" if compiled is not None else "python"

mixture_density = _impl.mixture_density
log_sequence_table = _impl.log_sequence_table
log_marginal_over_codebook = _impl.log_marginal_over_codebook

__all__ = [
    "BACKEND",
    "compiled",
    "fallback",
    "mixture_density",
    "log_sequence_table",
    "log_marginal_over_codebook",
]
