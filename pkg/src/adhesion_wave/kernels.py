"""Backend selection for the time-stepping kernel.

The compiled extension ``_kernels`` is used when it imports; otherwise the
numpy fallback in ``_kernels_py`` is used. Setting the environment variable
``ADHESION_WAVE_PURE=1`` forces the fallback.
"""

import os

from . import _kernels_py

FORCE_NONLINEAR = _kernels_py.FORCE_NONLINEAR
FORCE_LINEAR = _kernels_py.FORCE_LINEAR

_compiled = None
if os.environ.get("ADHESION_WAVE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def get_advance(backend=None):
    """Return the ``advance`` kernel of the requested backend.

    ``backend`` is ``"compiled"``, ``"python"`` or ``None`` for the default.
    """
    if backend is None:
        backend = BACKEND
    if backend == "python":
        return _kernels_py.advance
    if backend == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel extension is not available")
        return _compiled.advance
    raise ValueError(f"unknown backend {backend!r}")


def compiled_available():
    return _compiled is not None


advance = get_advance()
