"""Backend selection for the coordinate-sweep kernels.

The compiled module is used when it imports; setting ``DUHL_PURE_PYTHON=1``
forces the Python fallback.  ``get_backend`` returns either one explicitly.
"""
import importlib
import os

_NAMES = {"cython": "duhl._ckernels", "python": "duhl._pykernels"}


def get_backend(name):
    return importlib.import_module(_NAMES[name])


def available_backends():
    found = []
    for name in _NAMES:
        try:
            get_backend(name)
        except ImportError:
            continue
        found.append(name)
    return found


if os.environ.get("DUHL_PURE_PYTHON", "") not in ("", "0"):
    BACKEND = "python"
else:
    try:
        get_backend("cython")
        BACKEND = "cython"
    except ImportError:
        BACKEND = "python"

_impl = get_backend(BACKEND)
en_sweep = _impl.en_sweep
svm_sweep = _impl.svm_sweep
