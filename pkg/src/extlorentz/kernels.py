"""Hot-loop kernels, compiled when available.

The Cython extension ``_ckernels`` is used if it imports; otherwise the
numpy versions in ``_pykernels`` are used. Set ``EXTLORENTZ_PURE_PYTHON=1``
to force the fallback. ``BACKEND`` names the active choice.
"""
import os

from . import _pykernels

_ckernels = None
if not os.environ.get("EXTLORENTZ_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        _ckernels = None

_impl = _ckernels if _ckernels is not None else _pykernels
BACKEND = "cython" if _ckernels is not None else "python"

riemann = _impl.riemann
geodesic_accel = _impl.geodesic_accel
rk4_uniform = _impl.rk4_uniform


def available_backends():
    """Mapping of backend name to kernel module, fallback first."""
    out = {"python": _pykernels}
    if _ckernels is not None:
        out["cython"] = _ckernels
    return out
