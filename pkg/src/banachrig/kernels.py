"""Kernel backend selection.

The compiled extension is used when it imports; set ``BANACHRIG_PURE_PYTHON=1``
to force the numpy fallback.
"""
import os

if os.environ.get("BANACHRIG_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = "cython" if _impl.__name__.endswith("._kernels") else "python"

conjugate = _impl.conjugate
lp_norm = _impl.lp_norm
dual_preimage = _impl.dual_preimage
power_ascent = _impl.power_ascent

__all__ = ["BACKEND", "conjugate", "lp_norm", "dual_preimage", "power_ascent"]
