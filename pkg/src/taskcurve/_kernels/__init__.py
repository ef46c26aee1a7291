"""Kernel backend selection.

Imports the compiled extension when present, otherwise the NumPy/pure-Python
fallback.  Both expose the same functions with the same semantics.  Set
``TASKCURVE_FORCE_FALLBACK=1`` to skip the compiled module even when it is
installed (used by the cross-implementation tests and the benchmark).
"""

import os

if os.environ.get("TASKCURVE_FORCE_FALLBACK", "0") not in ("", "0"):
    from taskcurve._kernels import _fallback as _impl
else:
    try:
        from taskcurve._kernels import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        from taskcurve._kernels import _fallback as _impl

BACKEND = _impl.BACKEND
ln_gamma = _impl.ln_gamma
reg_lower_gamma = _impl.reg_lower_gamma
reg_inc_beta = _impl.reg_inc_beta
uniforms = _impl.uniforms
gaussians = _impl.gaussians
count_below_threshold = _impl.count_below_threshold
binomial_count = _impl.binomial_count

__all__ = [
    "BACKEND",
    "ln_gamma",
    "reg_lower_gamma",
    "reg_inc_beta",
    "uniforms",
    "gaussians",
    "count_below_threshold",
    "binomial_count",
]
