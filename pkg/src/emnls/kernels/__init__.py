"""Hot loops with a compiled backend and a numpy fallback.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy versions in ``_pykernels`` take over. Setting ``EMNLS_PURE_PYTHON=1``
forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("EMNLS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

phase_rotate = _impl.phase_rotate
advection_rhs = _impl.advection_rhs
shoot_radial = _impl.shoot_radial
radial_profile = _impl.radial_profile

OVERSHOOT = _pykernels.OVERSHOOT
UNDERSHOOT = _pykernels.UNDERSHOOT


def backends():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
