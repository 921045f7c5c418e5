"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
functionally identical (bit-equal outputs).  Set PARSEGAIT_KERNELS=python or
=compiled to force a backend; forcing an unavailable backend raises.
"""

import os

from . import _kernels_py

try:
    from . import _kernels
except ImportError:
    _kernels = None

_BACKENDS = {"python": _kernels_py}
if _kernels is not None:
    _BACKENDS["compiled"] = _kernels


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name):
    if name not in _BACKENDS:
        raise ImportError(
            f"kernel backend {name!r} unavailable (have: {', '.join(available_backends())})"
        )
    return _BACKENDS[name]


def use_backend(name):
    """Rebind the module-level kernel functions; returns the previous backend name."""
    global BACKEND, paint_disc, paint_capsule, fuse_crf, fuse_dcf, resize_nearest
    backend = get_backend(name)
    previous = BACKEND
    BACKEND = backend.BACKEND
    paint_disc = backend.paint_disc
    paint_capsule = backend.paint_capsule
    fuse_crf = backend.fuse_crf
    fuse_dcf = backend.fuse_dcf
    resize_nearest = backend.resize_nearest
    return previous


_forced = os.environ.get("PARSEGAIT_KERNELS")
_active = get_backend(_forced) if _forced else _BACKENDS.get("compiled", _kernels_py)

BACKEND = _active.BACKEND
paint_disc = _active.paint_disc
paint_capsule = _active.paint_capsule
fuse_crf = _active.fuse_crf
fuse_dcf = _active.fuse_dcf
resize_nearest = _active.resize_nearest
